//! New systems from old: restriction to a subgroup, passage to the fixed points of a
//! subgroup, tensor products and the commuting-actions construction. Every output is
//! re-run through the freeness battery.

use serde::{Deserialize, Serialize};

use crate::assemble::{freeness, from_action_with_basis, BaseModel, BlockLabel, DynamicalSystem, FreenessReport, SystemParts};
use crate::error::{Error, Result};
use crate::groups::{FgAbelianGroup, SubgroupQuotient};
use crate::linalg::{sparse, Matrix, SparseVec};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemSummary {
    pub group: Vec<u64>,
    pub dim: usize,
    pub fixed_dim: usize,
    pub commutative: bool,
    pub center_dim: usize,
    pub free: bool,
}

impl SystemSummary {
    pub fn of(sys: &DynamicalSystem) -> Self {
        SystemSummary {
            group: sys.group().factors().to_vec(),
            dim: sys.dim(),
            fixed_dim: sys.fixed_dim(),
            commutative: sys.is_commutative(),
            center_dim: sys.center_dim(),
            free: freeness(sys).free(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemMorphismReport {
    pub operation: String,
    pub sources: Vec<SystemSummary>,
    pub target: SystemSummary,
    pub freeness: FreenessReport,
    /// All sources free implies the target free.
    pub freeness_preserved: bool,
}

/// A constructed system together with its report.
#[derive(Clone, Debug)]
pub struct Derived {
    pub system: DynamicalSystem,
    pub report: SystemMorphismReport,
}

fn derive(operation: &str, sources: &[&DynamicalSystem], system: DynamicalSystem) -> Derived {
    let sources: Vec<SystemSummary> = sources.iter().map(|s| SystemSummary::of(s)).collect();
    let freeness = freeness(&system);
    let target = SystemSummary::of(&system);
    let freeness_preserved = !sources.iter().all(|s| s.free) || target.free;
    Derived { system, report: SystemMorphismReport { operation: operation.into(), sources, target, freeness, freeness_preserved } }
}

/// Restrict the action to the subgroup `H` generated by `generators` (coordinates in `G`).
pub fn restrict(d: &DynamicalSystem, generators: &[Vec<i64>]) -> Result<Derived> {
    let sq = d.group().subgroup_and_quotient(generators)?;
    let map = d.group().restriction_map(&sq);
    let sys = d.regrade(&sq.subgroup, &map, false)?;
    Ok(derive("restrict", &[d], sys))
}

/// For each character of `G` trivial on `N`, the corresponding character of `G/N`.
fn characters_of_quotient(group: &FgAbelianGroup, sq: &SubgroupQuotient) -> Vec<Option<usize>> {
    let q = &sq.quotient;
    let g = group.size();
    let (eg, eq) = (group.exponent() as u128, q.exponent() as u128);
    let gs: Vec<Vec<i64>> = (0..g).map(|h| group.coords_of(h)).collect();
    let projected: Vec<Vec<i64>> = gs.iter().map(|c| sq.project(c)).collect();
    (0..g)
        .map(|p| {
            (0..q.size()).find(|&c| {
                let cc = q.coords_of(c);
                gs.iter().zip(&projected).all(|(h, ph)| {
                    group.pair_exponent(&gs[p], h) as u128 * eq == q.pair_exponent(&cc, ph) as u128 * eg
                })
            })
        })
        .collect()
}

/// The fixed algebra `A^N` with the induced action of `G/N`.
pub fn quotient(d: &DynamicalSystem, generators: &[Vec<i64>]) -> Result<Derived> {
    let sq = d.group().subgroup_and_quotient(generators)?;
    let chars = characters_of_quotient(d.group(), &sq);
    let keep: Vec<usize> = (0..d.dim()).filter(|&k| chars[d.degrees()[k]].is_some()).collect();
    let map: Vec<usize> = chars.iter().map(|c| c.unwrap_or(0)).collect();
    let sys = d.subsystem(&keep, &sq.quotient, &map)?;
    Ok(derive("quotient", &[d], sys))
}

fn product_group(a: &FgAbelianGroup, b: &FgAbelianGroup) -> FgAbelianGroup {
    FgAbelianGroup::new(a.factors().iter().chain(b.factors()).copied().collect())
}

fn product_index(g: &FgAbelianGroup, h: &FgAbelianGroup, gh: &FgAbelianGroup, p: usize, c: usize) -> usize {
    let coords: Vec<i64> = g.coords_of(p).into_iter().chain(h.coords_of(c)).collect();
    gh.index_of(&coords)
}

fn tensor_base(a: &BaseModel, b: &BaseModel, dim2: usize) -> BaseModel {
    let s2 = b.blocks.len();
    let blocks = a.blocks.iter().flat_map(|&n| b.blocks.iter().map(move |&m| n * m)).collect();
    let units = a
        .units
        .iter()
        .flat_map(|(k1, l1)| {
            b.units.iter().map(move |(k2, l2)| {
                let m = b.blocks[l2.block];
                let label =
                    BlockLabel { block: l1.block * s2 + l2.block, row: l1.row * m + l2.row, col: l1.col * m + l2.col };
                (k1 * dim2 + k2, label)
            })
        })
        .collect();
    BaseModel { blocks, units }
}

/// `(A ⊗ C, G × H, α ⊗ γ)`, basis `e_k ⊗ f_l` at `k·dim(C) + l`.
pub fn tensor(d1: &DynamicalSystem, d2: &DynamicalSystem) -> Result<Derived> {
    let sys = tensor_system(d1, d2)?;
    Ok(derive("tensor", &[d1, d2], sys))
}

fn tensor_system(d1: &DynamicalSystem, d2: &DynamicalSystem) -> Result<DynamicalSystem> {
    let (g, h) = (d1.group(), d2.group());
    let gh = product_group(g, h);
    let dim2 = d2.dim();
    let degree = (0..d1.dim() * dim2)
        .map(|k| product_index(g, h, &gh, d1.degrees()[k / dim2], d2.degrees()[k % dim2]))
        .collect();
    let base = match (d1.base_model(), d2.base_model()) {
        (Some(a), Some(b)) => Some(tensor_base(a, b, dim2)),
        _ => None,
    };
    DynamicalSystem::from_parts(SystemParts {
        group: gh,
        degree,
        algebra: d1.raw().tensor(d2.raw()),
        base,
        labels: None,
        fs: None,
    })
}

/// Images of the `H`-generators as matrices on `A`, checked to commute with `α`.
fn check_commuting(d: &DynamicalSystem, beta: &[Matrix]) -> Result<()> {
    let g = d.group();
    for j in 0..g.rank() {
        let a = d.action_matrix(g.index_of(&g.generator(j)));
        for (i, b) in beta.iter().enumerate() {
            if b.rows != d.dim() || b.cols != d.dim() {
                return Err(Error::InvalidInput("β generator has the wrong size".into()));
            }
            if a.mul(b) != b.mul(&a) {
                return Err(Error::ActionsDoNotCommute(format!("α at generator {} and β at generator {}", j + 1, i + 1)));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct CommutingMix {
    /// `(A ⊗ C, G × H, (α∘β) ⊗ γ)`.
    pub product: Derived,
    /// `(A ⊗ C)^{β⊗γ}` with the induced `G`-action.
    pub fixed: Derived,
    /// Column `j` is the `j`-th basis vector of `product` in the basis `e_k ⊗ f_l`.
    pub basis: Matrix,
}

/// Both systems obtained from a `G`-system on `A`, an `H`-action `β` on `A` commuting with
/// `α` (one matrix per generator of `H`, columns are images of the basis of `A`), and a
/// free `H`-system on `C`.
pub fn commuting_mix(d: &DynamicalSystem, beta: &[Matrix], d2: &DynamicalSystem) -> Result<CommutingMix> {
    let h = d2.group();
    if beta.len() != h.rank() {
        return Err(Error::InvalidInput("one β matrix per generator of H required".into()));
    }
    check_commuting(d, beta)?;
    let g = d.group();
    let gh = product_group(g, h);
    let alg = d.raw().tensor(d2.raw());
    let id_c = Matrix::identity(d2.dim(), d2.order());
    let mut gens = Vec::with_capacity(gh.rank());
    for j in 0..g.rank() {
        gens.push(d.action_matrix(g.index_of(&g.generator(j))).kron(&id_c));
    }
    for (j, b) in beta.iter().enumerate() {
        let gamma = d2.action_matrix(h.index_of(&h.generator(j)));
        gens.push(b.kron(&gamma));
    }
    let (sys, basis) = from_action_with_basis(&gh, &alg, &gens)?;
    let product = derive("commuting_mix", &[d, d2], sys);
    let n_gens: Vec<Vec<i64>> = (0..h.rank())
        .map(|j| std::iter::repeat_n(0, g.rank()).chain(h.generator(j)).collect())
        .collect();
    let fixed = quotient(&product.system, &n_gens)?;
    Ok(CommutingMix { product, fixed, basis })
}

/// Images of the rebased basis of `mix.product` inside the plain tensor product.
pub fn mix_basis_images(mix: &CommutingMix) -> Vec<SparseVec> {
    (0..mix.basis.cols).map(|j| sparse(&mix.basis.column(j))).collect()
}

/// The diagonal copy of `G` inside `G × G`.
pub fn diagonal_generators(g: &FgAbelianGroup) -> Vec<Vec<i64>> {
    (0..g.rank()).map(|j| g.generator(j).into_iter().chain(g.generator(j)).collect()).collect()
}

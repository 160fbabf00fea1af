use std::path::{Path, PathBuf};

use freeact_core::assemble::{self, DynamicalSystem};
use freeact_core::bundles::{classify_bundles, flip_cocycle, gelfand_round_trip, realize_bundle, secondary_class, FiniteSpace};
use freeact_core::cohomology::{cohomology, stabilized_cohomology, CoefficientModule, Cochain, CohomologySummary, Stabilization};
use freeact_core::factorsys::{characteristic_class, class_verdict, obstruction, verify, FactorSystem, PicHomomorphism, RawFamily};
use freeact_core::groups::FgAbelianGroup;
use freeact_core::linalg::Matrix;
use freeact_core::sysops::{self, Derived};
use freeact_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::cache::{Cache, CachedCohomology, CohomologyKey, CACHE_VERSION};
use crate::config::{parse_list, parse_lists, WorkbenchConfig};
use crate::error::CliError;
use crate::report::{sha256_hex, Report};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OpKind {
    Restrict,
    Quotient,
    Tensor,
    Mix,
}

#[derive(Clone, Debug, clap::Subcommand)]
pub enum Command {
    /// H^n of the character group with coefficients in a permutation torus.
    Cohomology {
        /// Cyclic factors, e.g. `2,2`; `0` is Z. Overrides the config.
        #[arg(long)]
        group: Option<String>,
        /// Block sizes (only their number matters here).
        #[arg(long)]
        blocks: Option<String>,
        /// One-based block permutation per generator, e.g. `2,1;1,2`.
        #[arg(long)]
        action: Option<String>,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Normalization and associativity of the configured factor system.
    Check,
    /// Assemble the system and run the freeness, involution and GNS batteries.
    Build,
    /// Enumerate H² classes over φ, build each and compare them pairwise.
    Classify,
    /// Equivalence of `factor_system` and `compare`.
    Equiv,
    /// Twist `factor_system` by the `twist` cocycle.
    Twist,
    /// Obstruction of the `raw` family (or of the canonical family of φ).
    Obstruct,
    /// Commutative base: flip cocycle, secondary class, bundle realization.
    Bundle,
    /// Restriction, quotient, tensor product or commuting mix.
    Ops {
        #[arg(value_enum)]
        op: OpKind,
        /// Subgroup generators in coordinates, e.g. `1,1;0,2`. Overrides `[ops] subgroup`.
        #[arg(long)]
        subgroup: Option<String>,
        /// Config of the second system. Overrides `[ops] other`.
        #[arg(long)]
        other: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Cohomology { .. } => "cohomology",
            Command::Check => "check",
            Command::Build => "build",
            Command::Classify => "classify",
            Command::Equiv => "equiv",
            Command::Twist => "twist",
            Command::Obstruct => "obstruct",
            Command::Bundle => "bundle",
            Command::Ops { .. } => "ops",
        }
    }
}

pub struct Context {
    pub config: Option<WorkbenchConfig>,
    pub config_path: Option<PathBuf>,
    pub truncation: Option<u64>,
    pub seed: Option<u64>,
    pub cache: Option<Cache>,
}

impl Context {
    fn config(&self) -> Result<&WorkbenchConfig, CliError> {
        self.config.as_ref().ok_or_else(|| CliError::Config { location: "--config".into(), message: "this command needs a config file".into() })
    }

    fn truncation(&self) -> Result<u64, CliError> {
        Ok(self.truncation.unwrap_or(self.config()?.truncation()))
    }

    fn seed(&self) -> Option<u64> {
        self.seed.or(self.config.as_ref().and_then(|c| c.seed))
    }

    fn inputs(&self, extra: &str) -> String {
        let cfg = self.config.as_ref().map(|c| c.canonical()).unwrap_or_default();
        let t = self.truncation.map(|t| format!("truncation override = {t}\n")).unwrap_or_default();
        let s = self.seed.map(|s| format!("seed override = {s}\n")).unwrap_or_default();
        format!("{cfg}{t}{s}{extra}")
    }

    /// The configured factor system at the effective truncation.
    fn factor_system(&self) -> Result<(PicHomomorphism, Result<FactorSystem, Error>), CliError> {
        let cfg = self.config()?;
        let phi = cfg.phi()?;
        let omega = self.omega_at(cfg.omega()?)?;
        Ok((phi.clone(), FactorSystem::new(&phi, omega)))
    }

    fn omega_at(&self, c: Cochain) -> Result<Cochain, CliError> {
        match self.truncation {
            Some(t) if t != c.modulus => {
                let m = num_lcm(t, c.modulus);
                Ok(c.embed(m)?)
            }
            _ => Ok(c),
        }
    }
}

fn num_lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn run(cmd: &Command, ctx: &Context) -> Result<Report, CliError> {
    match cmd {
        Command::Cohomology { group, blocks, action, degree } => {
            run_cohomology(ctx, group.as_deref(), blocks.as_deref(), action.as_deref(), *degree)
        }
        Command::Check => run_check(ctx),
        Command::Build => run_build(ctx),
        Command::Classify => run_classify(ctx),
        Command::Equiv => run_equiv(ctx),
        Command::Twist => run_twist(ctx),
        Command::Obstruct => run_obstruct(ctx),
        Command::Bundle => run_bundle(ctx),
        Command::Ops { op, subgroup, other } => run_ops(ctx, *op, subgroup.as_deref(), other.as_deref()),
    }
}

/// `H^n` as a summary, served from the cache when possible.
fn cohomology_summary(
    ctx: &Context,
    group: &FgAbelianGroup,
    coeff: &CoefficientModule,
    degree: usize,
) -> Result<(CohomologySummary, Option<Stabilization>, Option<&'static str>), CliError> {
    let key = CohomologyKey {
        group: group.factors().to_vec(),
        blocks: coeff.blocks(),
        action: coeff.generators().to_vec(),
        degree,
        truncation: coeff.modulus(),
    };
    if let Some(cache) = &ctx.cache {
        if let Some(hit) = cache.get(&key) {
            return Ok((hit.summary, hit.stabilization, Some("hit")));
        }
    }
    let (summary, stabilization) = if group.is_finite() {
        let (r, st) = stabilized_cohomology(group, coeff, degree)?;
        (r.summary(), Some(st))
    } else {
        (cohomology(group, coeff, degree)?.summary(), None)
    };
    let status = match &ctx.cache {
        Some(cache) => {
            let entry = CachedCohomology { version: CACHE_VERSION.into(), key, summary: summary.clone(), stabilization: stabilization.clone() };
            cache.put(&entry)?;
            Some("miss")
        }
        None => Some("disabled"),
    };
    Ok((summary, stabilization, status))
}

fn run_cohomology(
    ctx: &Context,
    group: Option<&str>,
    blocks: Option<&str>,
    action: Option<&str>,
    degree: Option<usize>,
) -> Result<Report, CliError> {
    let cfg = ctx.config.as_ref();
    let group = match (group, cfg) {
        (Some(g), _) => FgAbelianGroup::new(parse_list("--group", g)?),
        (None, Some(c)) => c.group(),
        (None, None) => {
            return Err(CliError::Config { location: "--group".into(), message: "give --group or --config".into() })
        }
    };
    let s = match (blocks, cfg) {
        (Some(b), _) => parse_list::<usize>("--blocks", b)?.len(),
        (None, Some(c)) => c.blocks.len(),
        (None, None) => 1,
    };
    let action: Vec<Vec<usize>> = match (action, cfg) {
        (Some(a), _) => parse_lists::<usize>("--action", a)?
            .into_iter()
            .map(|p| p.into_iter().map(|x| x.wrapping_sub(1)).collect())
            .collect(),
        (None, Some(c)) if c.blocks.len() == s => c.action(),
        _ => vec![(0..s).collect(); group.rank()],
    };
    let degree = degree.or(cfg.map(|c| c.degree)).unwrap_or(2);
    let n = ctx.truncation.or(cfg.map(|c| c.truncation())).unwrap_or_else(|| group.exponent().max(1));
    let coeff = CoefficientModule::from_generators(&group, n, s, action.clone())
        .map_err(|e| CliError::Config { location: "--action".into(), message: e.to_string() })?;
    let extra = format!("cohomology group={:?} blocks={s} action={action:?} degree={degree} truncation={n}\n", group.factors());
    let mut report = Report::new("cohomology", ctx.inputs(&extra));
    let (summary, st, cache) = cohomology_summary(ctx, &group, &coeff, degree)?;
    report.runtime.cache = cache.map(str::to_string);
    let order: Option<u64> = (summary.torus_dimension == 0).then(|| summary.invariant_factors.iter().product());
    report.verdict("degree", degree);
    report.verdict("group", group.factors());
    report.verdict("truncation", summary.truncation);
    report.verdict("invariant_factors", &summary.invariant_factors);
    report.verdict("torus_dimension", summary.torus_dimension);
    report.verdict("order", order);
    report.verdict("trivial", summary.torus_dimension == 0 && summary.invariant_factors.is_empty());
    report.verdict("description", &summary.description);
    report.verdict("stabilization", &st);
    report.certificate("representatives", &summary.representatives);
    Ok(report)
}

fn run_check(ctx: &Context) -> Result<Report, CliError> {
    let cfg = ctx.config()?;
    let mut report = Report::new("check", ctx.inputs(""));
    let phi = cfg.phi()?;
    let omega = ctx.omega_at(cfg.omega()?)?;
    report.verdict("truncation", omega.modulus);
    let v = verify(&phi, &omega)?;
    report.verdict("factor_system", v.passed());
    report.verdict("normalization_violations", v.normalization_violations.len());
    report.verdict("cocycle_violations", v.cocycle_violations.len());
    report.certificate("normalization_violations", &v.normalization_violations);
    report.certificate("cocycle_violations", v.cocycle_violations.iter().take(32).collect::<Vec<_>>());
    Ok(report)
}

pub fn structure_digest(sys: &DynamicalSystem) -> String {
    sha256_hex(sys.structure_table().as_bytes())
}

/// Verdicts shared by every assembled system, with invariant checks recorded on `report`.
fn system_verdicts(report: &mut Report, sys: &DynamicalSystem, seed: Option<u64>) -> serde_json::Value {
    let f = assemble::freeness(sys);
    let inv = assemble::involution_checks(sys);
    let simp = sys.simplicity();
    report.require(f.agree(), "freeness criteria disagree");
    report.require(inv.all_hold(), "involution laws fail");
    let gns = seed.map(|s| {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        assemble::gns_checks(sys, &mut rng, 8)
    });
    if let Some(g) = &gns {
        report.require(g.all_hold(), "GNS checks fail");
    }
    json!({
        "dim": sys.dim(),
        "fixed_dim": sys.fixed_dim(),
        "center_dim": simp.center_dim,
        "commutative": sys.is_commutative(),
        "simple": simp.simple,
        "free": f.free(),
        "freeness": f,
        "involution": inv,
        "gns": gns.map(|g| json!(g)).unwrap_or_else(|| json!("skipped: no seed given")),
        "structure_digest": structure_digest(sys),
    })
}

fn refused(report: &mut Report, key: &str, e: &Error) {
    report.verdict(key, false);
    report.verdict(&format!("{key}_reason"), e.to_string());
}

fn run_build(ctx: &Context) -> Result<Report, CliError> {
    let mut report = Report::new("build", ctx.inputs(""));
    let (_, fs) = ctx.factor_system()?;
    let fs = match fs {
        Ok(fs) => fs,
        Err(e @ Error::NotAFactorSystem(_)) => {
            refused(&mut report, "factor_system", &e);
            return Ok(report);
        }
        Err(e) => return Err(e.into()),
    };
    report.verdict("factor_system", true);
    report.verdict("truncation", fs.modulus());
    let sys = assemble::build(&fs)?;
    let v = system_verdicts(&mut report, &sys, ctx.seed());
    report.verdict("system", v);
    let rebuilt = assemble::extract_factor_system(&sys).and_then(|e| assemble::build(&e));
    let round_trip = matches!(&rebuilt, Ok(r) if assemble::same_structure(r, &sys));
    report.verdict("round_trip", round_trip);
    report.require(round_trip, "extract-then-rebuild round trip differs");
    report.certificate("structure_table", sys.structure_table());
    Ok(report)
}

fn class_representative(summary: &CohomologySummary, coords: &[u64], g: usize, s: usize, n: u64) -> Result<Cochain, CliError> {
    let mut acc = Cochain::zero(g, 2, s, n);
    for (c, r) in coords.iter().zip(&summary.representatives) {
        acc = acc.add(&Cochain::from_values(g, 2, s, n, r.clone())?.scale(*c as i64));
    }
    Ok(acc)
}

fn enumerate(factors: &[u64]) -> Vec<Vec<u64>> {
    let total: u64 = factors.iter().product();
    (0..total)
        .map(|mut idx| {
            let mut v = vec![0u64; factors.len()];
            for (slot, &f) in v.iter_mut().zip(factors).rev() {
                *slot = idx % f;
                idx /= f;
            }
            v
        })
        .collect()
}

fn run_classify(ctx: &Context) -> Result<Report, CliError> {
    let cfg = ctx.config()?;
    let mut report = Report::new("classify", ctx.inputs(""));
    let phi = cfg.phi()?;
    let group = cfg.group();
    let n = ctx.truncation()?;
    report.verdict("truncation", n);
    let coeff = phi.coefficient_module(n);
    if !group.is_finite() {
        let h2 = cohomology(&group, &coeff, 2)?;
        let h3 = cohomology(&group, &coeff, 3)?;
        report.verdict("chi_trivial", h3.is_trivial_group());
        report.verdict("h2", h2.summary().description);
        let count = (h3.is_trivial_group() && h2.is_trivial_group()).then_some(1usize);
        report.verdict("class_count", count);
        report.verdict("assembled", "not assembled: the algebra is infinite-dimensional");
        return Ok(report);
    }
    let cc = characteristic_class(&phi)?;
    report.verdict("chi_trivial", cc.trivial);
    if !cc.trivial {
        report.verdict("class_count", 0);
        report.certificate("obstruction", cc.obstruction.values());
        return Ok(report);
    }
    let (summary, st, cache) = cohomology_summary(ctx, &group, &coeff, 2)?;
    report.runtime.cache = cache.map(str::to_string);
    report.verdict("stabilization", &st);
    report.verdict("invariant_factors", &summary.invariant_factors);
    let classes = enumerate(&summary.invariant_factors);
    let canonical = FactorSystem::canonical(&phi, n)?;
    let (g, s) = (group.size(), phi.algebra().block_count());
    let mut systems = Vec::new();
    let mut factor_systems = Vec::new();
    let mut reps = Vec::new();
    for c in &classes {
        let rep = class_representative(&summary, c, g, s, n)?;
        let fs = canonical.twist(&rep)?;
        let sys = assemble::build(&fs)?;
        let mut v = system_verdicts(&mut report, &sys, ctx.seed());
        v["class"] = json!(c);
        systems.push(v);
        reps.push(rep.values().to_vec());
        factor_systems.push(fs);
    }
    let matrix: Vec<Vec<bool>> = factor_systems
        .iter()
        .map(|a| factor_systems.iter().map(|b| a.equivalent(b).map(|w| w.is_some())).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;
    let diagonal = matrix.iter().enumerate().all(|(i, row)| row.iter().enumerate().all(|(j, &e)| e == (i == j)));
    report.require(diagonal, "distinct classes produced equivalent systems");
    report.verdict("class_count", classes.len());
    report.verdict("classes", &classes);
    report.verdict("pairwise_inequivalent", diagonal);
    report.verdict("equivalence_matrix", &matrix);
    report.verdict("systems", systems);
    report.certificate("representatives", reps);
    Ok(report)
}

fn run_equiv(ctx: &Context) -> Result<Report, CliError> {
    let cfg = ctx.config()?;
    let mut report = Report::new("equiv", ctx.inputs(""));
    let spec = cfg.compare.as_ref().ok_or_else(|| CliError::Config { location: "compare".into(), message: "equiv needs a [compare] table".into() })?;
    let (phi, fs) = ctx.factor_system()?;
    let other = FactorSystem::new(&phi, ctx.omega_at(cfg.cochain("compare", spec)?)?);
    let (fs, other) = match (fs, other) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            refused(&mut report, "factor_systems", &e);
            return Ok(report);
        }
    };
    let w = fs.equivalent(&other)?;
    report.verdict("equivalent", w.is_some());
    if let Some(w) = w {
        let ok = fs.verify_transport(&other, &w)?;
        report.verdict("transport_verified", ok);
        report.require(ok, "equivalence witness does not transport the multiplication");
        report.certificate("witness", json!({ "modulus": w.modulus, "values": w.values() }));
    }
    Ok(report)
}

fn run_twist(ctx: &Context) -> Result<Report, CliError> {
    let cfg = ctx.config()?;
    let mut report = Report::new("twist", ctx.inputs(""));
    let spec = cfg.twist.as_ref().ok_or_else(|| CliError::Config { location: "twist".into(), message: "twist needs a [twist] table".into() })?;
    let (_, fs) = ctx.factor_system()?;
    let fs = match fs {
        Ok(fs) => fs,
        Err(e) => {
            refused(&mut report, "factor_system", &e);
            return Ok(report);
        }
    };
    let t = cfg.cochain("twist", spec)?;
    match fs.twist(&t) {
        Ok(tw) => {
            report.verdict("is_cocycle", true);
            let w = fs.equivalent(&tw)?;
            report.verdict("equivalent_to_original", w.is_some());
            report.certificate("twisted_omega", json!({ "modulus": tw.modulus(), "values": tw.omega().values() }));
        }
        Err(e @ Error::NotACocycle) => refused(&mut report, "is_cocycle", &e),
        Err(e) => return Err(e.into()),
    }
    Ok(report)
}

fn run_obstruct(ctx: &Context) -> Result<Report, CliError> {
    let cfg = ctx.config()?;
    let mut report = Report::new("obstruct", ctx.inputs(""));
    let phi = cfg.phi()?;
    let raw = match &cfg.raw {
        Some(spec) => RawFamily::new(&phi, ctx.omega_at(cfg.cochain("raw", spec)?)?)?,
        None => RawFamily::canonical(&phi, ctx.truncation()?)?,
    };
    let ob = obstruction(&raw)?;
    report.verdict("is_cocycle", ob.is_cocycle);
    report.verdict("is_factor_system", ob.is_factor_system);
    report.require(ob.is_cocycle, "obstruction is not a 3-cocycle");
    let class = class_verdict(&phi, &ob.cochain)?;
    report.verdict("class_trivial", class.trivial);
    report.certificate("obstruction", json!({ "modulus": ob.cochain.modulus, "values": ob.cochain.values() }));
    if let Some(h) = &class.certificate {
        report.certificate("primitive", json!({ "modulus": h.modulus, "values": h.values() }));
    }
    Ok(report)
}

fn run_bundle(ctx: &Context) -> Result<Report, CliError> {
    let cfg = ctx.config()?;
    if cfg.blocks.iter().any(|&b| b != 1) {
        return Err(CliError::Config { location: "blocks".into(), message: "bundle needs a commutative base (all blocks of size 1)".into() });
    }
    let mut report = Report::new("bundle", ctx.inputs(""));
    let (phi, fs) = ctx.factor_system()?;
    let fs = match fs {
        Ok(fs) => fs,
        Err(e) => {
            refused(&mut report, "factor_system", &e);
            return Ok(report);
        }
    };
    let n = fs.modulus();
    let chi = characteristic_class(&phi)?;
    report.verdict("chi_trivial", chi.trivial);
    if phi.is_trivial() {
        let flip = flip_cocycle(&fs)?;
        report.require(flip.antisymmetric && flip.closed, "flip cocycle is not an antisymmetric cocycle");
        report.verdict("flip_zero", flip.is_zero());
        report.certificate("flip", flip.cochain.values());
        let sc = secondary_class(&phi, n, ctx.seed().unwrap_or(0))?;
        report.verdict("chi2_trivial", sc.trivial);
        report.require(sc.cross_check_agrees, "secondary class depends on the factor system");
    } else {
        report.verdict("chi2_trivial", "undefined: φ permutes the points of X");
    }
    match realize_bundle(&fs) {
        Ok(r) => {
            report.verdict("realizable", true);
            report.verdict("principal", r.is_principal());
            report.require(r.is_principal(), "realized action is not free over X");
            let gelfand = gelfand_round_trip(&fs, &r)?;
            report.verdict("gelfand_round_trip", gelfand);
            report.require(gelfand, "Gelfand transform is not an equivariant isomorphism");
            report.verdict("total_points", r.total_points());
            report.verdict("orbit_count", r.orbit_count);
            report.certificate("bundle", &r);
        }
        Err(e @ (Error::NotCommutative | Error::UnsupportedAction(_) | Error::Obstructed(_))) => refused(&mut report, "realizable", &e),
        Err(e) => return Err(e.into()),
    }
    if phi.is_trivial() {
        let space = FiniteSpace::new(cfg.blocks.len())?;
        match classify_bundles(&space, &phi, n) {
            Ok(c) => {
                report.verdict("bundle_count", c.count);
                report.verdict("free_action_count", c.total_free_count);
                report.certificate("bundle_classes", &c.classes);
            }
            Err(e @ Error::Obstructed(_)) => refused(&mut report, "bundle_count", &e),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(report)
}

fn built(ctx: &Context, cfg: &WorkbenchConfig) -> Result<DynamicalSystem, CliError> {
    let phi = cfg.phi()?;
    let omega = ctx.omega_at(cfg.omega()?)?;
    Ok(assemble::build(&FactorSystem::new(&phi, omega)?)?)
}

fn run_ops(ctx: &Context, op: OpKind, subgroup: Option<&str>, other: Option<&Path>) -> Result<Report, CliError> {
    let cfg = ctx.config()?;
    let other_cfg = match other {
        Some(p) => Some(WorkbenchConfig::load(p)?),
        None => cfg.other(ctx.config_path.as_deref())?,
    };
    let extra = format!(
        "ops {op:?} subgroup={subgroup:?}\n{}",
        other_cfg.as_ref().map(|c| c.canonical()).unwrap_or_default()
    );
    let mut report = Report::new("ops", ctx.inputs(&extra));
    let d = built(ctx, cfg)?;
    let gens = match subgroup {
        Some(s) => parse_lists::<i64>("--subgroup", s)?,
        None => cfg.ops.as_ref().map(|o| o.subgroup.clone()).unwrap_or_default(),
    };
    let second = || -> Result<DynamicalSystem, CliError> {
        let c = other_cfg.as_ref().ok_or_else(|| CliError::Config { location: "--other".into(), message: "this operation needs a second system".into() })?;
        built(ctx, c)
    };
    let derived: Derived = match op {
        OpKind::Restrict => sysops::restrict(&d, &gens)?,
        OpKind::Quotient => sysops::quotient(&d, &gens)?,
        OpKind::Tensor => sysops::tensor(&d, &second()?)?,
        OpKind::Mix => {
            // β is the trivial action of H; the config format has no way to give another
            let d2 = second()?;
            let beta = vec![Matrix::identity(d.dim(), d.order()); d2.group().rank()];
            sysops::commuting_mix(&d, &beta, &d2)?.product
        }
    };
    report.require(derived.report.freeness.agree(), "freeness criteria disagree");
    report.require(derived.report.freeness_preserved, "operation did not preserve freeness");
    report.verdict("operation", format!("{op:?}").to_lowercase());
    report.verdict("target", &derived.report.target);
    report.verdict("sources", &derived.report.sources);
    report.verdict("freeness_preserved", derived.report.freeness_preserved);
    report.certificate("freeness", &derived.report.freeness);
    report.certificate("structure_digest", structure_digest(&derived.system));
    Ok(report)
}

//! TOML input. A config names a group, a base algebra and a factor system; optional
//! tables supply the extra cochains some commands need.
//!
//! ```toml
//! group = [2, 2]            # cyclic factors, 0 for Z
//! blocks = [1]              # base algebra M_1
//! truncation = 2            # coefficients in μ_N
//!
//! [factor_system]
//! phi = [[1], [1]]          # one-based block permutation per generator
//! omega_bicharacter = [[0, 1], [0, 0]]
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use freeact_core::cohomology::{bicharacter, Cochain};
use freeact_core::factorsys::PicHomomorphism;
use freeact_core::fdcstar::{FdCStarAlgebra, PicardElement};
use freeact_core::groups::FgAbelianGroup;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CochainSpec {
    /// Entries keyed `"(a,b),(c,d)"`, one exponent per block; missing entries are 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<BTreeMap<String, Vec<i64>>>,
    /// `ω(π,ρ) = Σ b_ij π_i ρ_j` in every block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_bicharacter: Option<Vec<Vec<i64>>>,
    /// Defaults to the truncation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorSystemSpec {
    #[serde(default)]
    pub phi: Vec<Vec<usize>>,
    #[serde(flatten)]
    pub cochain: CochainSpec,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpsSpec {
    /// Generators of a subgroup of `G`, in coordinates.
    #[serde(default)]
    pub subgroup: Vec<Vec<i64>>,
    /// Config of the second system for `tensor` and `mix`, relative to this file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkbenchConfig {
    pub group: Vec<u64>,
    #[serde(default = "default_blocks")]
    pub blocks: Vec<usize>,
    #[serde(default = "default_one")]
    pub scalar_order: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<u64>,
    #[serde(default = "default_degree")]
    pub degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub factor_system: FactorSystemSpec,
    /// Second factor system over the same `φ`, for `equiv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CochainSpec>,
    /// Cocycle to twist by, for `twist`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist: Option<CochainSpec>,
    /// Deviation of a raw family, for `obstruct`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<CochainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ops: Option<OpsSpec>,
}

fn default_blocks() -> Vec<usize> {
    vec![1]
}

fn default_one() -> u32 {
    1
}

fn default_degree() -> usize {
    2
}

fn config_error(location: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Config { location: location.into(), message: message.into() }
}

impl WorkbenchConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg: WorkbenchConfig = toml::from_str(text).map_err(|e| {
            let location = e.span().map(|s| line_of(text, s.start)).unwrap_or_else(|| "config".into());
            config_error(location, e.message())
        })?;
        cfg.normalize()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_error(path.display().to_string(), e.to_string()))?;
        Self::parse(&text)
    }

    /// Parse-validate-echo form: defaults filled in, keys in a fixed order.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }

    fn normalize(&mut self) -> Result<(), CliError> {
        if self.blocks.is_empty() || self.blocks.contains(&0) {
            return Err(config_error("blocks", "block sizes must be positive and at least one block given"));
        }
        if self.scalar_order == 0 {
            return Err(config_error("scalar_order", "must be positive"));
        }
        if self.truncation == Some(0) {
            return Err(config_error("truncation", "must be positive"));
        }
        let s = self.blocks.len();
        let r = self.group.len();
        if self.factor_system.phi.is_empty() {
            self.factor_system.phi = vec![(1..=s).collect(); r];
        }
        if self.factor_system.phi.len() != r {
            return Err(config_error("factor_system.phi", format!("expected one permutation per generator ({r})")));
        }
        for (i, p) in self.factor_system.phi.iter().enumerate() {
            let mut seen = vec![false; s];
            for &x in p {
                if x == 0 || x > s || std::mem::replace(&mut seen[x - 1], true) {
                    return Err(config_error(format!("factor_system.phi[{i}]"), format!("not a permutation of 1..={s}")));
                }
            }
            if p.len() != s {
                return Err(config_error(format!("factor_system.phi[{i}]"), format!("not a permutation of 1..={s}")));
            }
        }
        if self.truncation.is_none() {
            let e = self.group().exponent();
            self.truncation = Some(if e == 0 { 1 } else { e });
        }
        let group = self.group();
        let blocks = s;
        let sections: [(&str, Option<&CochainSpec>); 4] = [
            ("factor_system", Some(&self.factor_system.cochain)),
            ("compare", self.compare.as_ref()),
            ("twist", self.twist.as_ref()),
            ("raw", self.raw.as_ref()),
        ];
        for (name, spec) in sections {
            if let Some(spec) = spec {
                check_cochain_spec(name, spec, &group, blocks)?;
            }
        }
        Ok(())
    }

    pub fn group(&self) -> FgAbelianGroup {
        FgAbelianGroup::new(self.group.clone())
    }

    pub fn truncation(&self) -> u64 {
        self.truncation.unwrap_or(1)
    }

    pub fn algebra(&self) -> Result<FdCStarAlgebra, CliError> {
        FdCStarAlgebra::new(self.blocks.clone(), self.scalar_order).map_err(|e| config_error("blocks", e.to_string()))
    }

    /// Zero-based generator permutations.
    pub fn action(&self) -> Vec<Vec<usize>> {
        self.factor_system.phi.iter().map(|p| p.iter().map(|x| x - 1).collect()).collect()
    }

    pub fn phi(&self) -> Result<PicHomomorphism, CliError> {
        let images = self
            .action()
            .into_iter()
            .map(PicardElement::new)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| config_error("factor_system.phi", e.to_string()))?;
        PicHomomorphism::new(&self.group(), &self.algebra()?, images).map_err(|e| config_error("factor_system.phi", e.to_string()))
    }

    /// `factor_system` cochain; zero when neither form is given.
    pub fn omega(&self) -> Result<Cochain, CliError> {
        self.cochain("factor_system", &self.factor_system.cochain)
    }

    pub fn cochain(&self, section: &str, spec: &CochainSpec) -> Result<Cochain, CliError> {
        let group = self.group();
        if !group.is_finite() {
            return Err(config_error(section, "cochains need a finite group"));
        }
        let modulus = spec.modulus.unwrap_or(self.truncation());
        let s = self.blocks.len();
        let g = group.size();
        if let Some(b) = &spec.omega_bicharacter {
            return bicharacter(&group, s, modulus, b).map_err(|e| config_error(format!("{section}.omega_bicharacter"), e.to_string()));
        }
        let mut c = Cochain::zero(g, 2, s, modulus);
        if let Some(table) = &spec.omega {
            for (key, v) in table {
                let (p, r) = parse_pair(key, &group).map_err(|m| config_error(format!("{section}.omega.\"{key}\""), m))?;
                c.set(&[group.index_of(&p), group.index_of(&r)], v);
            }
        }
        Ok(c)
    }

    /// The second system referenced by `[ops] other`, resolved against `base`.
    pub fn other(&self, base: Option<&Path>) -> Result<Option<WorkbenchConfig>, CliError> {
        let Some(rel) = self.ops.as_ref().and_then(|o| o.other.as_ref()) else {
            return Ok(None);
        };
        let path = base.and_then(|b| b.parent()).map(|d| d.join(rel)).unwrap_or_else(|| rel.into());
        Self::load(&path).map(Some)
    }
}

fn check_cochain_spec(section: &str, spec: &CochainSpec, group: &FgAbelianGroup, blocks: usize) -> Result<(), CliError> {
    if spec.omega.is_some() && spec.omega_bicharacter.is_some() {
        return Err(config_error(section, "give either omega or omega_bicharacter, not both"));
    }
    if spec.modulus == Some(0) {
        return Err(config_error(format!("{section}.modulus"), "must be positive"));
    }
    if let Some(b) = &spec.omega_bicharacter {
        let r = group.rank();
        if b.len() != r || b.iter().any(|row| row.len() != r) {
            return Err(config_error(format!("{section}.omega_bicharacter"), format!("expected a {r}×{r} matrix")));
        }
    }
    if let Some(table) = &spec.omega {
        for (key, v) in table {
            let loc = format!("{section}.omega.\"{key}\"");
            parse_pair(key, group).map_err(|m| config_error(loc.clone(), m))?;
            if v.len() != blocks {
                return Err(config_error(loc, format!("expected {blocks} exponents, one per block")));
            }
        }
    }
    Ok(())
}

/// `"(1,0),(0,1)"` into two coordinate vectors.
fn parse_pair(key: &str, group: &FgAbelianGroup) -> Result<(Vec<i64>, Vec<i64>), String> {
    let compact: String = key.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = compact
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| "expected a key of the form \"(a,b),(c,d)\"".to_string())?;
    let parts: Vec<&str> = inner.split("),(").collect();
    if parts.len() != 2 {
        return Err("expected exactly two group elements".into());
    }
    let parse = |s: &str| -> Result<Vec<i64>, String> {
        let v: Vec<i64> = if s.is_empty() {
            vec![]
        } else {
            s.split(',').map(|x| x.parse::<i64>().map_err(|_| format!("{x:?} is not an integer"))).collect::<Result<_, _>>()?
        };
        if v.len() != group.rank() {
            return Err(format!("expected {} coordinates per element", group.rank()));
        }
        Ok(group.reduce(&v))
    };
    Ok((parse(parts[0])?, parse(parts[1])?))
}

fn line_of(text: &str, offset: usize) -> String {
    let line = text[..offset.min(text.len())].matches('\n').count() + 1;
    format!("line {line}")
}

/// Comma-separated integers, e.g. `"2,2"`.
pub fn parse_list<T: std::str::FromStr>(flag: &str, s: &str) -> Result<Vec<T>, CliError> {
    if s.trim().is_empty() {
        return Ok(vec![]);
    }
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| config_error(flag, format!("{x:?} is not a number"))))
        .collect()
}

/// Semicolon-separated lists, e.g. `"2,1;1,2"`.
pub fn parse_lists<T: std::str::FromStr>(flag: &str, s: &str) -> Result<Vec<Vec<T>>, CliError> {
    s.split(';').filter(|p| !p.trim().is_empty()).map(|p| parse_list(flag, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAULI: &str = r#"
group = [2, 2]
truncation = 2

[factor_system]
omega_bicharacter = [[0, 1], [0, 0]]
"#;

    #[test]
    fn canonical_echo_is_stable() {
        let a = WorkbenchConfig::parse(PAULI).unwrap();
        let b = WorkbenchConfig::parse(&a.canonical()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.canonical(), b.canonical());
        assert_eq!(a.factor_system.phi, vec![vec![1], vec![1]]);
    }

    #[test]
    fn table_and_bicharacter_agree() {
        let t = r#"
group = [2, 2]
[factor_system.omega]
"(1,0),(0,1)" = [1]
"(1,0),(1,1)" = [1]
"(1,1),(0,1)" = [1]
"(1,1),(1,1)" = [1]
"#;
        let a = WorkbenchConfig::parse(t).unwrap().omega().unwrap();
        let b = WorkbenchConfig::parse(PAULI).unwrap().omega().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_keys_are_located() {
        let t = "group = [2, 2]\n[factor_system.omega]\n\"(1,0),(0)\" = [1]\n";
        match WorkbenchConfig::parse(t) {
            Err(CliError::Config { location, .. }) => assert_eq!(location, "factor_system.omega.\"(1,0),(0)\""),
            other => panic!("{other:?}"),
        }
        let t = "group = [2]\nblocks = [1, 1]\n[factor_system]\nphi = [[1, 1]]\n";
        assert!(matches!(WorkbenchConfig::parse(t), Err(CliError::Config { location, .. }) if location == "factor_system.phi[0]"));
    }
}

//! Cloner families selectable by name.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::bound::{analytic_bound_real, analytic_bound_universal, BoundResult, REAL_EXPRESSION, UNIVERSAL_EXPRESSION};
use crate::cloner::{optimal_real_coefficients, universal_coefficients, ClonerCoefficients};
use crate::error::{Error, Result};

/// Angles the optimizer is allowed to move. Frozen angles are held at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchSpace {
    pub alpha: bool,
    pub phi: bool,
}

pub trait ClonerFamily: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    fn analytic_bound(&self, d: usize) -> Result<BoundResult>;

    /// Coefficients of the explicit cloner reaching the bound.
    fn coefficients(&self, d: usize) -> Result<ClonerCoefficients>;

    fn search_space(&self) -> SearchSpace;

    fn expression(&self) -> &'static str;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Real;

impl ClonerFamily for Real {
    fn name(&self) -> &'static str {
        "real"
    }

    fn description(&self) -> &'static str {
        "clones every real state equally"
    }

    fn analytic_bound(&self, d: usize) -> Result<BoundResult> {
        analytic_bound_real(d)
    }

    fn coefficients(&self, d: usize) -> Result<ClonerCoefficients> {
        optimal_real_coefficients(d)
    }

    fn search_space(&self) -> SearchSpace {
        SearchSpace { alpha: true, phi: true }
    }

    fn expression(&self) -> &'static str {
        REAL_EXPRESSION
    }
}

/// Clones every complex state equally. Covariance under the unitary group
/// forces `k3 = k6 = 0`, hence `phi = 0` and `alpha` drops out.
#[derive(Debug, Clone, Copy, Default)]
pub struct Universal;

impl ClonerFamily for Universal {
    fn name(&self) -> &'static str {
        "universal"
    }

    fn description(&self) -> &'static str {
        "clones every complex state equally"
    }

    fn analytic_bound(&self, d: usize) -> Result<BoundResult> {
        analytic_bound_universal(d)
    }

    fn coefficients(&self, d: usize) -> Result<ClonerCoefficients> {
        universal_coefficients(d)
    }

    fn search_space(&self) -> SearchSpace {
        SearchSpace { alpha: false, phi: false }
    }

    fn expression(&self) -> &'static str {
        UNIVERSAL_EXPRESSION
    }
}

#[derive(Clone)]
pub struct ClonerFamilies {
    entries: BTreeMap<&'static str, Arc<dyn ClonerFamily>>,
}

impl ClonerFamilies {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, family: Arc<dyn ClonerFamily>) {
        self.entries.insert(family.name(), family);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn ClonerFamily>> {
        self.entries.get(name).cloned().ok_or_else(|| Error::UnknownName {
            kind: "cloner family",
            name: name.to_string(),
            available: self.names().join(", "),
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn ClonerFamily>> {
        self.entries.values()
    }
}

impl Default for ClonerFamilies {
    fn default() -> Self {
        let mut families = Self::empty();
        families.register(Arc::new(Real));
        families.register(Arc::new(Universal));
        families
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloner::clone_fidelity;

    #[test]
    fn registry_lookup() {
        let families = ClonerFamilies::default();
        assert_eq!(families.names(), vec!["real", "universal"]);
        assert_eq!(families.get("real").unwrap().name(), "real");
        let err = families.get("mub").err().unwrap();
        assert!(err.to_string().contains("real, universal"));
    }

    #[test]
    fn coefficients_reach_each_bound() {
        for family in ClonerFamilies::default().iter() {
            for d in 2..=16 {
                let c = family.coefficients(d).unwrap();
                let bound = family.analytic_bound(d).unwrap();
                assert_eq!(bound.family, family.name());
                assert!((clone_fidelity(&c) - bound.f_max).abs() < 1e-12);
            }
        }
    }
}

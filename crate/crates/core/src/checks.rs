//! Named property checks on monoid homomorphisms, selectable at runtime.

use crate::error::Result;
use crate::morphism::{self, MonoidMap, Verdict};
use std::sync::LazyLock;

#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    pub paranoid: bool,
    /// Upper bound `n` for the bounded quasisaturation search.
    pub quasisat_n: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { paranoid: false, quasisat_n: 6 }
    }
}

pub trait PropertyCheck: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self, h: &MonoidMap, opts: &CheckOptions) -> Result<Verdict>;
}

struct Check {
    name: &'static str,
    description: &'static str,
    run: fn(&MonoidMap, &CheckOptions) -> Result<Verdict>,
}

impl PropertyCheck for Check {
    fn name(&self) -> &'static str {
        self.name
    }

    fn description(&self) -> &'static str {
        self.description
    }

    fn run(&self, h: &MonoidMap, opts: &CheckOptions) -> Result<Verdict> {
        (self.run)(h, opts)
    }
}

static REGISTRY: LazyLock<Vec<Box<dyn PropertyCheck>>> = LazyLock::new(|| {
    let checks: Vec<Check> = vec![
        Check { name: "local", description: "preimage of units is units", run: |h, _| Ok(morphism::is_local(h)) },
        Check { name: "injective_gp", description: "h^gp is injective", run: |h, _| Ok(morphism::is_injective_gp(h)) },
        Check { name: "vertical", description: "Q is dominated by the image of P", run: |h, _| morphism::is_vertical(h) },
        Check { name: "exact", description: "(h^gp)^-1(Q) = P", run: |h, _| morphism::is_exact(h) },
        Check {
            name: "localizations_exact",
            description: "every localization along a face of P is exact",
            run: |h, _| morphism::localizations_exact(h),
        },
        Check {
            name: "integral",
            description: "Kato's equational criterion",
            run: |h, o| morphism::is_integral(h, o.paranoid),
        },
        Check {
            name: "saturated",
            description: "integral and every pushout along [n] is saturated",
            run: |h, _| morphism::is_saturated(h),
        },
        Check {
            name: "quasisaturated",
            description: "pushouts along [n] are saturated for n up to the bound",
            run: |h, o| morphism::quasisaturated_upto(h, o.quasisat_n),
        },
    ];
    checks.into_iter().map(|c| Box::new(c) as Box<dyn PropertyCheck>).collect()
});

pub fn all() -> &'static [Box<dyn PropertyCheck>] {
    &REGISTRY
}

pub fn lookup(name: &str) -> Option<&'static dyn PropertyCheck> {
    REGISTRY.iter().find(|c| c.name() == name).map(|c| c.as_ref())
}

pub fn names() -> Vec<&'static str> {
    REGISTRY.iter().map(|c| c.name()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::IntegerMatrix;
    use crate::monoid::FineMonoid;

    #[test]
    fn identity_passes_everything() {
        let h = MonoidMap::identity(&FineMonoid::free(2));
        for c in all() {
            assert!(c.run(&h, &CheckOptions::default()).unwrap().holds, "{}", c.name());
        }
    }

    #[test]
    fn lookup_by_name() {
        let h = MonoidMap::new(FineMonoid::free(1), FineMonoid::free(1), IntegerMatrix::from_i64(1, 1, &[2])).unwrap();
        let q = lookup("quasisaturated").unwrap();
        assert!(!q.run(&h, &CheckOptions { paranoid: false, quasisat_n: 2 }).unwrap().holds);
        assert!(lookup("flat").is_none());
        assert_eq!(names().len(), 8);
    }
}

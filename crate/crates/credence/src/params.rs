//! Primitive market parameters and their validity constraints.
//!
//! All quantities are money amounts except `h` and `mu`, which are
//! probabilities. The constraints checked by [`validate_params`]:
//!
//! * `h`, `mu` strictly inside (0, 1);
//! * `l_s > l_m > 0`, `p_s > p_m > 0`, `c_s > c_m >= 0`;
//! * both treatments are profitable and the serious one strictly more so:
//!   `p_s − c_s > p_m − c_m > 0` (mixed-strategy acceptance probabilities are
//!   ratios of these margins, so both must be positive);
//! * `p_s < l_m`: treatment is always worth buying at the posted prices;
//! * `k > k_return >= 0`: returning to a known expert is cheaper than a fresh
//!   search. The resentment variant inverts this ordering and validates
//!   through its own entry point.

use serde::{Deserialize, Serialize};

use crate::error::{CredenceError, Result};

/// Primitive parameters of the two-period credence-service market.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Share of honest experts in the market.
    pub h: f64,
    /// Prior probability that the consumer's problem is minor.
    pub mu: f64,
    /// Consumer loss from an untreated minor problem.
    pub l_m: f64,
    /// Consumer loss from an untreated serious problem.
    pub l_s: f64,
    /// Price of the minor treatment.
    pub p_m: f64,
    /// Price of the serious treatment.
    pub p_s: f64,
    /// Expert cost of providing the minor treatment.
    pub c_m: f64,
    /// Expert cost of providing the serious treatment.
    pub c_s: f64,
    /// Cost of searching out a new expert.
    pub k: f64,
    /// Cost of returning to a previously visited expert.
    pub k_return: f64,
}

/// Names of the ten primitive parameters, in canonical order.
pub const PARAM_NAMES: [&str; 10] = [
    "h", "mu", "l_m", "l_s", "p_m", "p_s", "c_m", "c_s", "k", "k_return",
];

impl ModelParams {
    /// Reference parameter set used throughout the examples and the figure
    /// sweeps: `l_m=6, l_s=10, p_s=5, p_m=2, c_s=2, c_m=1, k=1, k_return=0`,
    /// with `h` and `mu` free.
    pub fn demo(h: f64, mu: f64) -> Self {
        ModelParams {
            h,
            mu,
            l_m: 6.0,
            l_s: 10.0,
            p_m: 2.0,
            p_s: 5.0,
            c_m: 1.0,
            c_s: 2.0,
            k: 1.0,
            k_return: 0.0,
        }
    }

    /// Expert margin on the minor treatment, `p_m − c_m`.
    pub fn margin_m(&self) -> f64 {
        self.p_m - self.c_m
    }

    /// Expert margin on the serious treatment, `p_s − c_s`.
    pub fn margin_s(&self) -> f64 {
        self.p_s - self.c_s
    }

    /// Read a parameter by name. Returns `None` for unknown names.
    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "h" => self.h,
            "mu" => self.mu,
            "l_m" => self.l_m,
            "l_s" => self.l_s,
            "p_m" => self.p_m,
            "p_s" => self.p_s,
            "c_m" => self.c_m,
            "c_s" => self.c_s,
            "k" => self.k,
            "k_return" => self.k_return,
            _ => return None,
        })
    }

    /// Set a parameter by name. Returns `false` for unknown names.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        match name {
            "h" => self.h = value,
            "mu" => self.mu = value,
            "l_m" => self.l_m = value,
            "l_s" => self.l_s = value,
            "p_m" => self.p_m = value,
            "p_s" => self.p_s = value,
            "c_m" => self.c_m = value,
            "c_s" => self.c_s = value,
            "k" => self.k = value,
            "k_return" => self.k_return = value,
            _ => return false,
        }
        true
    }
}

/// Which ordering of the two search costs a validation pass enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SearchCostRule {
    /// Base model and most variants: `k > k_return >= 0`.
    ReturnCheaper,
    /// Resentment variant: `k_return > k > 0`.
    ReturnDearer,
}

pub(crate) fn validate_with(p: &ModelParams, rule: SearchCostRule) -> Result<()> {
    let mut violations: Vec<String> = Vec::new();
    let mut need = |ok: bool, name: &str| {
        if !ok {
            violations.push(name.to_string());
        }
    };

    let finite = PARAM_NAMES.iter().all(|n| p.get(n).unwrap().is_finite());
    need(finite, "all parameters finite");
    if finite {
        need(p.h > 0.0 && p.h < 1.0, "0 < h < 1");
        need(p.mu > 0.0 && p.mu < 1.0, "0 < mu < 1");
        need(p.l_m > 0.0 && p.l_s > p.l_m, "l_s > l_m > 0");
        need(p.p_m > 0.0 && p.p_s > p.p_m, "p_s > p_m > 0");
        need(p.c_m >= 0.0 && p.c_s > p.c_m, "c_s > c_m >= 0");
        need(p.p_m > p.c_m, "p_m > c_m");
        need(
            p.p_s - p.c_s > p.p_m - p.c_m,
            "margin ordering: p_s - c_s > p_m - c_m",
        );
        need(p.p_s < p.l_m, "p_s < l_m");
        match rule {
            SearchCostRule::ReturnCheaper => {
                need(p.k > p.k_return && p.k_return >= 0.0, "k > k_return >= 0");
            }
            SearchCostRule::ReturnDearer => {
                need(p.k_return > p.k && p.k > 0.0, "k_return > k > 0");
            }
        }
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(CredenceError::InvalidParams(violations))
    }
}

/// Check every base-model parameter constraint, returning the parameters
/// unchanged on success and an error naming all violated constraints
/// otherwise.
pub fn validate_params(p: &ModelParams) -> Result<ModelParams> {
    validate_with(p, SearchCostRule::ReturnCheaper)?;
    Ok(*p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_is_valid() {
        let p = ModelParams::demo(0.5, 0.5);
        assert!(validate_params(&p).is_ok());
    }

    #[test]
    fn price_above_minor_loss_is_rejected() {
        let mut p = ModelParams::demo(0.5, 0.5);
        p.p_s = 7.0; // above l_m = 6
        let err = validate_params(&p).unwrap_err();
        match err {
            CredenceError::InvalidParams(v) => {
                assert!(v.iter().any(|c| c.contains("p_s < l_m")), "{v:?}");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn margin_ordering_is_rejected() {
        let mut p = ModelParams::demo(0.5, 0.5);
        p.c_s = 4.5; // p_s − c_s = 0.5 below p_m − c_m = 1
        let err = validate_params(&p).unwrap_err();
        match err {
            CredenceError::InvalidParams(v) => {
                assert!(v.iter().any(|c| c.contains("margin ordering")), "{v:?}");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn all_violations_are_reported() {
        let mut p = ModelParams::demo(1.5, -0.2);
        p.k_return = 2.0; // above k = 1
        let err = validate_params(&p).unwrap_err();
        match err {
            CredenceError::InvalidParams(v) => {
                assert!(v.len() >= 3, "expected several violations, got {v:?}");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn get_set_round_trip() {
        let mut p = ModelParams::demo(0.4, 0.6);
        for name in PARAM_NAMES {
            let v = p.get(name).unwrap();
            assert!(p.set(name, v + 0.0));
            assert_eq!(p.get(name).unwrap(), v);
        }
        assert!(p.get("nope").is_none());
        assert!(!p.set("nope", 1.0));
    }
}

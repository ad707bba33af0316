//! Strategy objects for the two market sides and the tags used to label
//! equilibrium classes.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Recommendation behaviour of an opportunistic expert. Each field is the
/// probability of recommending *truthfully* (matching the treatment to the
/// problem) at the given visit. Honest experts always recommend truthfully
/// and are represented implicitly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpertStrategy {
    /// P(truthful recommendation | minor problem, first visit).
    pub t_m1: f64,
    /// P(truthful recommendation | serious problem, first visit).
    pub t_s1: f64,
    /// P(truthful recommendation | minor problem, second visit).
    pub t_m2: f64,
    /// P(truthful recommendation | serious problem, second visit).
    pub t_s2: f64,
}

/// Acceptance behaviour of the consumer: probability of accepting a
/// minor/serious recommendation at her first/second visit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsumerStrategy {
    /// P(accept | minor recommendation, first visit).
    pub a_m1: f64,
    /// P(accept | serious recommendation, first visit).
    pub a_s1: f64,
    /// P(accept | minor recommendation, second visit).
    pub a_m2: f64,
    /// P(accept | serious recommendation, second visit).
    pub a_s2: f64,
}

impl ExpertStrategy {
    /// All fields inside [0, 1] (NaN fails).
    pub fn in_unit(&self) -> bool {
        [self.t_m1, self.t_s1, self.t_m2, self.t_s2]
            .iter()
            .all(|v| (0.0..=1.0).contains(v))
    }
}

impl ConsumerStrategy {
    /// All fields inside [0, 1] (NaN fails).
    pub fn in_unit(&self) -> bool {
        [self.a_m1, self.a_s1, self.a_m2, self.a_s2]
            .iter()
            .all(|v| (0.0..=1.0).contains(v))
    }
}

/// Equilibrium class tags.
///
/// The two letter pairs read: first pair = overtreatment intent on minor
/// problems (`F` full: `t_m1 = 0`; `P` partial: mixed; `N` none: `t_m1 = 1`),
/// second pair = undertreatment on serious problems (`FU` full: `t_s1 = 0`;
/// `PU` partial: mixed; `NU` none: `t_s1 = 1`). Capacity-shock models use
/// `PONU` for the profile (t_m1=0, t_s1=1, a_m1=0, a_s1=1), where the
/// "partial" reads on aggregate overtreatment: the shocked share of
/// opportunistic experts cannot overtreat, and consumers walk away from
/// first-visit minor recommendations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// Full overtreatment, full undertreatment: (0, 0, 1, 1).
    #[serde(rename = "FOFU")]
    Fofu,
    /// Partial overtreatment, full undertreatment: t_m1 mixed, a_s1 mixed.
    #[serde(rename = "POFU")]
    Pofu,
    /// Full overtreatment, partial undertreatment: t_s1 mixed, a_m1 mixed.
    #[serde(rename = "FOPU")]
    Fopu,
    /// Full overtreatment intent, no undertreatment: (0, 1, 1, 1).
    #[serde(rename = "FONU")]
    Fonu,
    /// Partial overtreatment, no undertreatment; see the type-level note for
    /// the capacity-model reading (0, 1, 0, 1).
    #[serde(rename = "PONU")]
    Ponu,
    /// Hidden-history regime (0, 0, 1, 0): full fraud on both problem types
    /// while consumers reject first-visit serious recommendations.
    FofuRejectSerious,
    /// Marker: no pure-strategy equilibrium exists at this point.
    NoPureEquilibrium,
    /// Marker: the point falls outside the analytically characterized
    /// regions.
    OutsideCharacterizedRegion,
}

impl Regime {
    /// Serialized tag, as used in CSV and JSON output.
    pub fn tag(&self) -> &'static str {
        match self {
            Regime::Fofu => "FOFU",
            Regime::Pofu => "POFU",
            Regime::Fopu => "FOPU",
            Regime::Fonu => "FONU",
            Regime::Ponu => "PONU",
            Regime::FofuRejectSerious => "FofuRejectSerious",
            Regime::NoPureEquilibrium => "NoPureEquilibrium",
            Regime::OutsideCharacterizedRegion => "OutsideCharacterizedRegion",
        }
    }

    /// True for the marker tags that carry no strategy profile.
    pub fn is_marker(&self) -> bool {
        matches!(
            self,
            Regime::NoPureEquilibrium | Regime::OutsideCharacterizedRegion
        )
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_interval_checks() {
        let e = ExpertStrategy {
            t_m1: 0.0,
            t_s1: 0.5,
            t_m2: 1.0,
            t_s2: 1.0,
        };
        assert!(e.in_unit());
        let bad = ExpertStrategy { t_m1: 1.2, ..e };
        assert!(!bad.in_unit());
        let nan = ExpertStrategy {
            t_m1: f64::NAN,
            ..e
        };
        assert!(!nan.in_unit());
    }

    #[test]
    fn regime_tags_round_trip_through_serde() {
        for r in [
            Regime::Fofu,
            Regime::Pofu,
            Regime::Fopu,
            Regime::Fonu,
            Regime::Ponu,
            Regime::FofuRejectSerious,
            Regime::NoPureEquilibrium,
            Regime::OutsideCharacterizedRegion,
        ] {
            let json = serde_json::to_string(&r).unwrap();
            assert_eq!(json, format!("\"{}\"", r.tag()));
            let back: Regime = serde_json::from_str(&json).unwrap();
            assert_eq!(back, r);
        }
    }
}

//! Model selection: the base market plus its extensions and variants, each
//! identified by a tag and (where applicable) one scalar knob.

use serde::{Deserialize, Serialize};

/// Which market model a computation runs under.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", content = "knob")]
pub enum ModelKind {
    /// Two-period search market with perfect diagnosis and observable
    /// histories.
    #[serde(rename = "base")]
    Base,
    /// Experts misread the problem with probability epsilon.
    #[serde(rename = "epsilon")]
    Epsilon(f64),
    /// With probability chi a capacity shock forces the minor treatment.
    #[serde(rename = "capacity")]
    Capacity(f64),
    /// Experts cannot observe the consumer's visit history.
    #[serde(rename = "hidden_history")]
    HiddenHistory,
    /// Consumers pay only the price difference when an undertreated problem
    /// is fixed on a return visit.
    #[serde(rename = "alt_contract")]
    AltContract,
    /// Undertreated consumers discover the unresolved problem only with
    /// probability 1 − delta before the game ends.
    #[serde(rename = "delta")]
    Delta(f64),
    /// Returning to the initial expert costs more than a fresh search
    /// (k_return > k).
    #[serde(rename = "resentment")]
    Resentment {
        /// Combine with unobservable visit histories.
        hidden_history: bool,
    },
    /// A share alpha of consumers can verify the diagnosis themselves.
    #[serde(rename = "heterogeneity")]
    Heterogeneity(f64),
    /// Prices are chosen by the experts rather than fixed.
    #[serde(rename = "endogenous_price")]
    EndogenousPrice,
}

impl ModelKind {
    /// The tag used by the command line and serialized documents.
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Base => "base",
            ModelKind::Epsilon(_) => "epsilon",
            ModelKind::Capacity(_) => "capacity",
            ModelKind::HiddenHistory => "hidden_history",
            ModelKind::AltContract => "alt_contract",
            ModelKind::Delta(_) => "delta",
            ModelKind::Resentment { .. } => "resentment",
            ModelKind::Heterogeneity(_) => "heterogeneity",
            ModelKind::EndogenousPrice => "endogenous_price",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip_through_serde_tags() {
        let kinds = [
            ModelKind::Base,
            ModelKind::Epsilon(0.1),
            ModelKind::Capacity(0.2),
            ModelKind::HiddenHistory,
            ModelKind::AltContract,
            ModelKind::Delta(0.5),
            ModelKind::Resentment {
                hidden_history: true,
            },
            ModelKind::Heterogeneity(0.3),
            ModelKind::EndogenousPrice,
        ];
        for k in kinds {
            let js = serde_json::to_string(&k).unwrap();
            assert!(js.contains(k.name()), "{js} should mention {}", k.name());
            let back: ModelKind = serde_json::from_str(&js).unwrap();
            assert_eq!(back, k);
        }
    }
}

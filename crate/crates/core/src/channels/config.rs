use serde::{Deserialize, Serialize};

use super::diagonal::PauliDiagonalChannel;
use super::families::{correlated_amplitude_damping, correlated_pauli_diagonal, PauliProbabilities};
use super::Channel;
use crate::error::{Error, Result};

/// Channel description as written in TOML config files, e.g.
///
/// ```toml
/// family = "depolarizing"
/// n = 3
/// q = 0.00052
/// mu = 0.25
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", try_from = "RawChannel")]
pub enum ChannelConfig {
    Identity {
        n: usize,
    },
    BitFlip {
        n: usize,
        p: f64,
        #[serde(default)]
        mu: f64,
    },
    Depolarizing {
        n: usize,
        q: f64,
        #[serde(default)]
        mu: f64,
    },
    Dephasing {
        n: usize,
        p: f64,
        #[serde(default)]
        mu: f64,
    },
    /// Either a Markov-chain vector `p_vec = [p_I, p_X, p_Y, p_Z]` with `mu`,
    /// or the full list of Pauli probabilities `beta` (length `4ⁿ`).
    PauliCustom {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p_vec: Option<[f64; 4]>,
        #[serde(default)]
        mu: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<Vec<f64>>,
    },
    AmpDampCorr {
        eta: f64,
        #[serde(default)]
        mu: f64,
    },
}

/// Flat form of the config table. Deserializing through a plain struct keeps
/// the TOML positions of type errors, which a tagged enum would discard.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    family: String,
    n: Option<usize>,
    p: Option<f64>,
    q: Option<f64>,
    eta: Option<f64>,
    mu: Option<f64>,
    p_vec: Option<[f64; 4]>,
    beta: Option<Vec<f64>>,
}

impl TryFrom<RawChannel> for ChannelConfig {
    type Error = String;

    fn try_from(raw: RawChannel) -> Result<Self, String> {
        let family = raw.family.as_str();
        let given = [
            ("n", raw.n.is_some()),
            ("p", raw.p.is_some()),
            ("q", raw.q.is_some()),
            ("eta", raw.eta.is_some()),
            ("mu", raw.mu.is_some()),
            ("p_vec", raw.p_vec.is_some()),
            ("beta", raw.beta.is_some()),
        ];
        let (allowed, required): (&[&str], &[&str]) = match family {
            "identity" => (&["n"], &["n"]),
            "bit_flip" | "dephasing" => (&["n", "p", "mu"], &["n", "p"]),
            "depolarizing" => (&["n", "q", "mu"], &["n", "q"]),
            "pauli_custom" => (&["n", "p_vec", "mu", "beta"], &["n"]),
            "amp_damp_corr" => (&["eta", "mu"], &["eta"]),
            other => {
                return Err(format!(
                    "unknown channel family `{other}`, expected one of identity, bit_flip, \
                     depolarizing, dephasing, pauli_custom, amp_damp_corr"
                ))
            }
        };
        for (key, present) in given {
            if present && !allowed.contains(&key) {
                return Err(format!("field `{key}` is not used by family `{family}`"));
            }
            if !present && required.contains(&key) {
                return Err(format!("family `{family}` requires field `{key}`"));
            }
        }
        let n = raw.n.unwrap_or(2);
        let mu = raw.mu.unwrap_or(0.0);
        Ok(match family {
            "identity" => ChannelConfig::Identity { n },
            "bit_flip" => ChannelConfig::BitFlip { n, p: raw.p.unwrap_or_default(), mu },
            "dephasing" => ChannelConfig::Dephasing { n, p: raw.p.unwrap_or_default(), mu },
            "depolarizing" => ChannelConfig::Depolarizing { n, q: raw.q.unwrap_or_default(), mu },
            "pauli_custom" => ChannelConfig::PauliCustom {
                n,
                p_vec: raw.p_vec,
                mu,
                beta: raw.beta,
            },
            _ => ChannelConfig::AmpDampCorr {
                eta: raw.eta.unwrap_or_default(),
                mu,
            },
        })
    }
}

impl ChannelConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| toml_error(text, &e))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("channel config serializes")
    }

    pub fn n(&self) -> usize {
        match self {
            ChannelConfig::Identity { n }
            | ChannelConfig::BitFlip { n, .. }
            | ChannelConfig::Depolarizing { n, .. }
            | ChannelConfig::Dephasing { n, .. }
            | ChannelConfig::PauliCustom { n, .. } => *n,
            ChannelConfig::AmpDampCorr { .. } => 2,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            ChannelConfig::Identity { .. } => "identity",
            ChannelConfig::BitFlip { .. } => "bit_flip",
            ChannelConfig::Depolarizing { .. } => "depolarizing",
            ChannelConfig::Dephasing { .. } => "dephasing",
            ChannelConfig::PauliCustom { .. } => "pauli_custom",
            ChannelConfig::AmpDampCorr { .. } => "amp_damp_corr",
        }
    }

    pub fn mu(&self) -> f64 {
        match self {
            ChannelConfig::Identity { .. } => 0.0,
            ChannelConfig::BitFlip { mu, .. }
            | ChannelConfig::Depolarizing { mu, .. }
            | ChannelConfig::Dephasing { mu, .. }
            | ChannelConfig::PauliCustom { mu, .. }
            | ChannelConfig::AmpDampCorr { mu, .. } => *mu,
        }
    }

    /// The scalar noise strength (`p`, `q` or `η`), when the family has one.
    pub fn strength(&self) -> Option<f64> {
        match self {
            ChannelConfig::BitFlip { p, .. } | ChannelConfig::Dephasing { p, .. } => Some(*p),
            ChannelConfig::Depolarizing { q, .. } => Some(*q),
            ChannelConfig::AmpDampCorr { eta, .. } => Some(*eta),
            _ => None,
        }
    }

    pub fn with_mu(&self, value: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            ChannelConfig::Identity { .. } => {}
            ChannelConfig::BitFlip { mu, .. }
            | ChannelConfig::Depolarizing { mu, .. }
            | ChannelConfig::Dephasing { mu, .. }
            | ChannelConfig::PauliCustom { mu, .. }
            | ChannelConfig::AmpDampCorr { mu, .. } => *mu = value,
        }
        out
    }

    pub fn with_strength(&self, value: f64) -> Result<Self> {
        let mut out = self.clone();
        match &mut out {
            ChannelConfig::BitFlip { p, .. } | ChannelConfig::Dephasing { p, .. } => *p = value,
            ChannelConfig::Depolarizing { q, .. } => *q = value,
            ChannelConfig::AmpDampCorr { eta, .. } => *eta = value,
            other => {
                return Err(Error::Config(format!(
                    "family {} has no scalar strength parameter",
                    other.family()
                )))
            }
        }
        Ok(out)
    }

    pub fn is_pauli(&self) -> bool {
        !matches!(self, ChannelConfig::AmpDampCorr { .. })
    }

    /// Pauli families come back in diagonal form, amplitude damping in Kraus
    /// form.
    pub fn build(&self) -> Result<Channel> {
        let ch = match self {
            ChannelConfig::Identity { n } => PauliDiagonalChannel::identity(*n)?.into(),
            ChannelConfig::BitFlip { n, p, mu } => {
                correlated_pauli_diagonal(*n, &PauliProbabilities::bit_flip(*p)?, *mu)?.into()
            }
            ChannelConfig::Depolarizing { n, q, mu } => {
                correlated_pauli_diagonal(*n, &PauliProbabilities::depolarizing(*q)?, *mu)?.into()
            }
            ChannelConfig::Dephasing { n, p, mu } => {
                correlated_pauli_diagonal(*n, &PauliProbabilities::dephasing(*p)?, *mu)?.into()
            }
            ChannelConfig::PauliCustom { n, p_vec, mu, beta } => match (p_vec, beta) {
                (Some(p), None) => {
                    correlated_pauli_diagonal(*n, &PauliProbabilities::new(*p)?, *mu)?.into()
                }
                (None, Some(beta)) => PauliDiagonalChannel::from_probabilities(*n, beta.clone())?.into(),
                _ => {
                    return Err(Error::Config(
                        "pauli_custom needs exactly one of `p_vec` or `beta`".into(),
                    ))
                }
            },
            ChannelConfig::AmpDampCorr { eta, mu } => correlated_amplitude_damping(*eta, *mu)?.into(),
        };
        Ok(ch)
    }
}

pub(crate) fn toml_error(text: &str, e: &toml::de::Error) -> Error {
    let (line, column) = e
        .span()
        .map(|span| line_col(text, span.start))
        .unwrap_or((1, 1));
    Error::parse(line, column, e.message().trim().to_string())
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |p| before.len() - p - 1) + 1;
    (line, column)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_family() {
        let cases = [
            "family = \"identity\"\nn = 2\n",
            "family = \"bit_flip\"\nn = 1\np = 0.1\n",
            "family = \"depolarizing\"\nn = 3\nq = 0.00052\nmu = 0.25\n",
            "family = \"dephasing\"\nn = 2\np = 0.2\nmu = 0.5\n",
            "family = \"pauli_custom\"\nn = 2\np_vec = [0.7, 0.1, 0.1, 0.1]\nmu = 0.3\n",
            "family = \"pauli_custom\"\nn = 1\nbeta = [0.7, 0.1, 0.1, 0.1]\n",
            "family = \"amp_damp_corr\"\neta = 0.5\nmu = 0.2\n",
        ];
        for text in cases {
            let cfg = ChannelConfig::from_toml_str(text).unwrap();
            let ch = cfg.build().unwrap();
            assert_eq!(ch.n(), cfg.n());
            let again = ChannelConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
            assert_eq!(again, cfg);
        }
    }

    #[test]
    fn errors_carry_positions() {
        let err = ChannelConfig::from_toml_str("family = \"bit_flip\"\nn = 1\np = \"x\"\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = ChannelConfig::from_toml_str("family = \"warp\"\nn = 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        let err = ChannelConfig::from_toml_str("family = \"identity\"\nn = 1\nextra = 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = ChannelConfig::from_toml_str("family = \"identity\"\nn = 1\np = 0.1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err:?}");
    }

    #[test]
    fn custom_requires_one_source() {
        let cfg = ChannelConfig::PauliCustom {
            n: 1,
            p_vec: None,
            mu: 0.0,
            beta: None,
        };
        assert!(matches!(cfg.build(), Err(Error::Config(_))));
    }

    #[test]
    fn grid_overrides() {
        let cfg = ChannelConfig::Depolarizing { n: 3, q: 0.1, mu: 0.0 };
        let moved = cfg.with_mu(0.75).with_strength(0.2).unwrap();
        assert_eq!(moved, ChannelConfig::Depolarizing { n: 3, q: 0.2, mu: 0.75 });
        assert!(ChannelConfig::Identity { n: 1 }.with_strength(0.1).is_err());
    }

    #[test]
    fn line_col_counts_from_one() {
        assert_eq!(line_col("ab\ncd", 0), (1, 1));
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
    }
}

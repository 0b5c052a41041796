//! PTM estimation for unknown unital channels from the probe states
//! `ρₖ = (𝟙 + 𝒫ₖ)/d`, and the characteristic-polynomial positivity test
//! used to certify those probes.
//!
//! The channel is only ever used as a black-box state transformer
//! ([`QuantumMap`]). Probe preparation is virtual: the map is applied to the
//! probe density matrix directly.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{Ptm, QuantumMap};
use crate::deconvolution::DiagonalSource;
use crate::error::{Error, Result};
use crate::pauli::{pauli_element, vectorize, Operator, PauliIndex};
use crate::sampling::{sample_pauli_mean, stream_rng, Estimate};
use crate::textio::fmt_f64;

/// `|Tr[𝒫ⱼ Φ(𝟙/d)]|` above this marks the channel as non-unital.
pub const UNITALITY_TOL: f64 = 1e-9;
/// `Sₘ` values at or above this count as nonnegative.
pub const PSD_TOL: f64 = -1e-10;

/// `ρₖ = (𝟙 + 𝒫ₖ)/d` for `k ≠ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeState {
    k: PauliIndex,
    operator: Operator,
}

pub fn probe_state(k: PauliIndex) -> Result<ProbeState> {
    if k.is_identity() {
        return Err(Error::IdentityProbe);
    }
    let id = Operator::identity(k.n())?;
    let d = id.dim() as f64;
    let operator = id
        .add(&pauli_element(k))?
        .scale(Complex64::new(1.0 / d, 0.0));
    Ok(ProbeState { k, operator })
}

impl ProbeState {
    pub fn k(&self) -> PauliIndex {
        self.k
    }

    pub fn operator(&self) -> &Operator {
        &self.operator
    }
}

/// Characteristic-polynomial coefficients `S₀ … S_d` of `ρ` from the
/// power-sum recursion `Sₘ = (1/m) Σⱼ₌₁..ₘ (−1)^(j−1) Tr[ρʲ] Sₘ₋ⱼ`, `S₀ = 1`.
pub fn positivity_coefficients(rho: &Operator) -> Vec<f64> {
    let d = rho.dim();
    let mut power_traces = Vec::with_capacity(d);
    let mut power = rho.matrix().clone();
    for j in 1..=d {
        power_traces.push(power.trace().re);
        if j < d {
            power = &power * rho.matrix();
        }
    }
    let mut s = vec![1.0f64];
    for m in 1..=d {
        let mut acc = 0.0;
        for j in 1..=m {
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * power_traces[j - 1] * s[m - j];
        }
        s.push(acc / m as f64);
    }
    s
}

/// Nonnegativity of every `Sₘ` within [`PSD_TOL`].
pub fn is_positive_semidefinite(coefficients: &[f64]) -> bool {
    coefficients.iter().all(|s| *s >= PSD_TOL)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharacterizationMode {
    DiagonalOnly,
    Full,
}

/// Estimated PTM entries `(j, k) → Γⱼₖ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacterizedPtm {
    n: usize,
    mode: CharacterizationMode,
    entries: BTreeMap<(PauliIndex, PauliIndex), Estimate>,
    shots: u64,
    seed: u64,
    probes: usize,
}

impl CharacterizedPtm {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> CharacterizationMode {
        self.mode
    }

    pub fn entries(&self) -> &BTreeMap<(PauliIndex, PauliIndex), Estimate> {
        &self.entries
    }

    pub fn entry(&self, j: PauliIndex, k: PauliIndex) -> Option<Estimate> {
        self.entries.get(&(j, k)).copied()
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of distinct probe states prepared.
    pub fn probe_count(&self) -> usize {
        self.probes
    }

    /// Full PTM, completing row 0 and column 0 from trace preservation and
    /// unitality. Only available in full mode.
    pub fn to_ptm(&self) -> Result<Ptm> {
        if self.mode != CharacterizationMode::Full {
            return Err(Error::InvalidParameter(
                "only a full characterization yields a PTM".into(),
            ));
        }
        let mut ptm = Ptm::identity(self.n)?.matrix().clone();
        for ((j, k), est) in &self.entries {
            ptm[(j.index(), k.index())] = est.value;
        }
        Ptm::from_matrix(self.n, ptm)
    }

    /// CSV report with one row per estimated entry.
    pub fn to_report(&self) -> String {
        let mut out = String::from("j,k,estimate,std_error,shots,seed\n");
        for ((j, k), est) in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                j.label(),
                k.label(),
                fmt_f64(est.value),
                fmt_f64(est.std_error),
                self.shots,
                self.seed
            );
        }
        out
    }

    /// Parses a report written by [`to_report`](Self::to_report). Reports
    /// whose entries are all diagonal load in diagonal-only mode.
    pub fn from_report(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::parse(1, 1, e.to_string()))?
            .clone();
        let expected = ["j", "k", "estimate", "std_error", "shots", "seed"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::parse(1, 1, format!("expected header {}", expected.join(","))));
        }
        let mut entries = BTreeMap::new();
        let mut n = None;
        let mut shots = 0;
        let mut seed = 0;
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| Error::parse(line, 1, e.to_string()))?;
            let field = |c: usize| record.get(c).unwrap_or("");
            let column = |c: usize| {
                record
                    .position()
                    .map(|_| (0..c).map(|x| record.get(x).map_or(0, str::len) + 1).sum::<usize>() + 1)
                    .unwrap_or(1)
            };
            let j = PauliIndex::from_label(field(0)).map_err(|e| Error::parse(line, column(0), e.to_string()))?;
            let k = PauliIndex::from_label(field(1)).map_err(|e| Error::parse(line, column(1), e.to_string()))?;
            if *n.get_or_insert(j.n()) != j.n() || j.n() != k.n() {
                return Err(Error::parse(line, column(0), "inconsistent qubit count"));
            }
            let num = |c: usize| -> Result<f64> {
                field(c)
                    .parse::<f64>()
                    .map_err(|_| Error::parse(line, column(c), format!("invalid number {:?}", field(c))))
            };
            let int = |c: usize| -> Result<u64> {
                field(c)
                    .parse::<u64>()
                    .map_err(|_| Error::parse(line, column(c), format!("invalid integer {:?}", field(c))))
            };
            entries.insert(
                (j, k),
                Estimate {
                    value: num(2)?,
                    std_error: num(3)?,
                },
            );
            shots = int(4)?;
            seed = int(5)?;
        }
        let n = n.ok_or_else(|| Error::parse(2, 1, "report has no entries"))?;
        let diagonal = entries.keys().all(|(j, k)| j == k);
        let probes = entries.keys().map(|(_, k)| *k).collect::<std::collections::BTreeSet<_>>().len();
        Ok(Self {
            n,
            mode: if diagonal {
                CharacterizationMode::DiagonalOnly
            } else {
                CharacterizationMode::Full
            },
            entries,
            shots,
            seed,
            probes,
        })
    }
}

impl DiagonalSource for CharacterizedPtm {
    fn n(&self) -> usize {
        self.n
    }

    fn diagonal_entry(&self, k: PauliIndex) -> Result<f64> {
        if k.is_identity() {
            return Ok(1.0);
        }
        self.entry(k, k)
            .map(|e| e.value)
            .ok_or_else(|| Error::MissingPtmEntry {
                row: k.label(),
                col: k.label(),
            })
    }
}

/// `Tr[𝒫ⱼ Φ(𝟙/d)]` for `j ≠ 0`: zero for every `j` iff the map is unital.
fn unitality_residuals(ch: &(impl QuantumMap + ?Sized)) -> Result<Vec<f64>> {
    let out = ch.apply(&Operator::maximally_mixed(ch.n())?)?;
    let d = out.dim() as f64;
    Ok(vectorize(&out)
        .coeffs()
        .iter()
        .map(|c| (c * d).norm())
        .collect())
}

fn check_unital(residuals: &[f64], ks: impl IntoIterator<Item = PauliIndex>) -> Result<()> {
    for k in ks {
        let residual = residuals[k.index()];
        if residual > UNITALITY_TOL {
            return Err(Error::NonUnitalChannel {
                label: k.label(),
                residual,
            });
        }
    }
    Ok(())
}

/// `Γₖₖ ≈ ⟨𝒫ₖ⟩` on `Φ(ρₖ)`. `shots = 0` returns the exact expectation.
pub fn estimate_diagonal_entry(
    ch: &(impl QuantumMap + ?Sized),
    k: PauliIndex,
    shots: u64,
    seed: u64,
) -> Result<Estimate> {
    let probe = probe_state(k)?;
    let residuals = unitality_residuals(ch)?;
    check_unital(&residuals, [k])?;
    measure_probe_diagonal(ch, &probe, shots, seed)
}

fn measure_probe_diagonal(
    ch: &(impl QuantumMap + ?Sized),
    probe: &ProbeState,
    shots: u64,
    seed: u64,
) -> Result<Estimate> {
    let out = ch.apply(probe.operator())?;
    let exact = out.pauli_trace(probe.k).re;
    sample_pauli_mean(exact, shots, &mut stream_rng(seed, &[probe.k.index() as u64]))
}

/// Diagonal-only characterization of the requested entries, one probe each.
pub fn estimate_diagonal(
    ch: &(impl QuantumMap + ?Sized),
    ks: &[PauliIndex],
    shots: u64,
    seed: u64,
) -> Result<CharacterizedPtm> {
    let n = ch.n();
    let wanted: Vec<PauliIndex> = ks
        .iter()
        .copied()
        .filter(|k| !k.is_identity())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    if let Some(bad) = wanted.iter().find(|k| k.n() != n) {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            found: 1 << bad.n(),
        });
    }
    let residuals = unitality_residuals(ch)?;
    check_unital(&residuals, wanted.iter().copied())?;
    let estimates: Vec<Estimate> = wanted
        .par_iter()
        .map(|k| measure_probe_diagonal(ch, &probe_state(*k)?, shots, seed))
        .collect::<Result<_>>()?;
    Ok(CharacterizedPtm {
        n,
        mode: CharacterizationMode::DiagonalOnly,
        probes: wanted.len(),
        entries: wanted.iter().zip(estimates).map(|(k, e)| ((*k, *k), e)).collect(),
        shots,
        seed,
    })
}

/// Full characterization: every `Γⱼₖ` with `j, k ≠ 0` from `d² − 1` probes.
pub fn estimate_full_ptm(
    ch: &(impl QuantumMap + ?Sized),
    shots: u64,
    seed: u64,
) -> Result<CharacterizedPtm> {
    let n = ch.n();
    let residuals = unitality_residuals(ch)?;
    check_unital(&residuals, PauliIndex::all(n)?.skip(1))?;
    let probes: Vec<PauliIndex> = PauliIndex::all(n)?.skip(1).collect();
    let columns: Vec<Vec<(PauliIndex, Estimate)>> = probes
        .par_iter()
        .map(|&k| {
            let out = ch.apply(probe_state(k)?.operator())?;
            let d = out.dim() as f64;
            let coeffs = vectorize(&out);
            let mut rng = stream_rng(seed, &[k.index() as u64]);
            PauliIndex::all(n)?
                .skip(1)
                .map(|j| {
                    let exact = coeffs.coeff(j).re * d;
                    Ok((j, sample_pauli_mean(exact, shots, &mut rng)?))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut entries = BTreeMap::new();
    for (k, column) in probes.iter().zip(columns) {
        for (j, est) in column {
            entries.insert((j, *k), est);
        }
    }
    Ok(CharacterizedPtm {
        n,
        mode: CharacterizationMode::Full,
        probes: probes.len(),
        entries,
        shots,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{
        amplitude_damping, bit_flip_channel, correlated_amplitude_damping, depolarizing_channel,
        KrausChannel,
    };

    fn idx(label: &str) -> PauliIndex {
        PauliIndex::from_label(label).unwrap()
    }

    #[test]
    fn single_qubit_z_probe_is_zero_state() {
        let probe = probe_state(idx("Z")).unwrap();
        assert_eq!(probe.operator(), &Operator::basis_projector(1, 0).unwrap());
    }

    #[test]
    fn zz_probe_is_diagonal_half() {
        let probe = probe_state(idx("ZZ")).unwrap();
        let expected = Operator::from_real_rows(&[
            vec![0.5, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.5],
        ])
        .unwrap();
        assert_eq!(probe.operator(), &expected);
    }

    #[test]
    fn identity_probe_is_rejected() {
        assert_eq!(probe_state(idx("II")).unwrap_err(), Error::IdentityProbe);
    }

    #[test]
    fn positivity_examples() {
        let s = positivity_coefficients(probe_state(idx("Z")).unwrap().operator());
        assert_eq!(s, vec![1.0, 1.0, 0.0]);
        let mixed = positivity_coefficients(&Operator::maximally_mixed(2).unwrap());
        assert!(mixed.iter().all(|v| *v > 0.0));
        let bad = Operator::from_real_rows(&[vec![1.5, 0.0], vec![0.0, -0.5]]).unwrap();
        let s = positivity_coefficients(&bad);
        assert!(s.iter().any(|v| *v < 0.0));
        assert!(!is_positive_semidefinite(&s));
    }

    #[test]
    fn identity_channel_characterizes_to_one() {
        let ch = KrausChannel::identity(2).unwrap();
        for k in PauliIndex::all(2).unwrap().skip(1) {
            assert_eq!(estimate_diagonal_entry(&ch, k, 0, 0).unwrap().value, 1.0);
        }
        let full = estimate_full_ptm(&ch, 0, 0).unwrap();
        assert_eq!(full.to_ptm().unwrap(), Ptm::identity(2).unwrap());
    }

    #[test]
    fn depolarizing_diagonal_entry() {
        let ch = depolarizing_channel(1, 0.2, 0.0).unwrap();
        let est = estimate_diagonal_entry(&ch, idx("Z"), 0, 0).unwrap();
        assert!((est.value - 0.8).abs() < 1e-15);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn bit_flip_entry_matches_kraus_ptm() {
        let ch = bit_flip_channel(2, 0.12, 0.4).unwrap();
        let est = estimate_diagonal_entry(&ch, idx("ZZ"), 0, 0).unwrap();
        let ptm = ch.ptm().unwrap();
        assert!((est.value - ptm.entry(idx("ZZ"), idx("ZZ"))).abs() < 1e-12);
    }

    #[test]
    fn amplitude_damping_is_non_unital() {
        let ch = correlated_amplitude_damping(0.5, 0.0).unwrap();
        assert!(matches!(
            estimate_full_ptm(&ch, 0, 0),
            Err(Error::NonUnitalChannel { .. })
        ));
        assert!(matches!(
            estimate_diagonal_entry(&amplitude_damping(0.5).unwrap(), idx("Z"), 0, 0),
            Err(Error::NonUnitalChannel { .. })
        ));
        let lossless = correlated_amplitude_damping(1.0, 0.3).unwrap();
        let full = estimate_full_ptm(&lossless, 0, 0).unwrap();
        assert!(full.to_ptm().unwrap().max_abs_diff(&Ptm::identity(2).unwrap()) < 1e-15);
    }

    #[test]
    fn diagonal_mode_stores_only_requested_entries() {
        let ch = bit_flip_channel(2, 0.1, 0.0).unwrap();
        let c = estimate_diagonal(&ch, &[idx("ZZ"), idx("XI"), idx("ZZ"), idx("II")], 0, 0).unwrap();
        assert_eq!(c.entries().len(), 2);
        assert_eq!(c.probe_count(), 2);
        assert_eq!(c.mode(), CharacterizationMode::DiagonalOnly);
        assert!(c.to_ptm().is_err());
    }

    #[test]
    fn report_round_trip() {
        let ch = bit_flip_channel(1, 0.1, 0.0).unwrap();
        let c = estimate_full_ptm(&ch, 1024, 42).unwrap();
        let text = c.to_report();
        let back = CharacterizedPtm::from_report(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_report(), text);
        let err = CharacterizedPtm::from_report("j,k,estimate,std_error,shots,seed\nZ,Z,abc,0,1,1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, column: 5, .. }), "{err:?}");
    }

    #[test]
    fn sampled_estimates_are_reproducible() {
        let ch = depolarizing_channel(2, 0.1, 0.5).unwrap();
        let a = estimate_full_ptm(&ch, 512, 9).unwrap();
        let b = estimate_full_ptm(&ch, 512, 9).unwrap();
        assert_eq!(a, b);
    }
}

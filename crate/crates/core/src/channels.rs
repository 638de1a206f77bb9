//! Channel data model: classical channels, classical-quantum channels, and
//! wiretap channels assembled from their Bob and Charlie reductions.
//!
//! Classical channels enter every entropy computation through their
//! diagonal embedding, so a wiretap channel is always a pair of
//! [`CqChannel`]s fed by a copied classical input.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::linalg::{projector, DensityMatrix, HermitianMatrix, PureState, C64};
use crate::tolerances::Tolerances;

/// Output letter used for the erasure flag of [`bec`].
pub const ERASURE_SYMBOL: usize = 2;

/// Row-stochastic matrix `p(y|x)`, one row per input letter.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalChannel {
    rows: Vec<Vec<f64>>,
}

impl ClassicalChannel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || width == 0 {
            return Err(Error::Validation(
                "classical channel needs at least one input and output".into(),
            ));
        }
        for (x, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Validation(format!(
                    "row {x} has {} entries, expected {width}",
                    row.len()
                )));
            }
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::Validation(format!(
                    "row {x} has entries outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > Tolerances::DEFAULT.probability {
                return Err(Error::Validation(format!("row {x} sums to {sum}")));
            }
        }
        Ok(Self { rows })
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// Binary symmetric channel with crossover probability `p`.
pub fn bsc(p: f64) -> Result<ClassicalChannel> {
    check_probability("crossover probability", p)?;
    ClassicalChannel::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
}

/// Binary erasure channel; the erasure flag is output letter [`ERASURE_SYMBOL`].
pub fn bec(p: f64) -> Result<ClassicalChannel> {
    check_probability("erasure probability", p)?;
    ClassicalChannel::new(vec![vec![1.0 - p, 0.0, p], vec![0.0, 1.0 - p, p]])
}

/// Classical-quantum channel: one density matrix per input letter.
#[derive(Debug, Clone, PartialEq)]
pub struct CqChannel {
    outputs: Vec<DensityMatrix>,
}

impl CqChannel {
    pub fn new(outputs: Vec<DensityMatrix>) -> Result<Self> {
        let Some(first) = outputs.first() else {
            return Err(Error::Validation(
                "cq channel needs at least one input letter".into(),
            ));
        };
        let dim = first.dim();
        if outputs.iter().any(|o| o.dim() != dim) {
            return Err(Error::Validation(
                "cq channel outputs differ in dimension".into(),
            ));
        }
        Ok(Self { outputs })
    }

    pub fn input_size(&self) -> usize {
        self.outputs.len()
    }

    pub fn output_dim(&self) -> usize {
        self.outputs[0].dim()
    }

    pub fn output(&self, x: usize) -> &DensityMatrix {
        &self.outputs[x]
    }

    pub fn outputs(&self) -> &[DensityMatrix] {
        &self.outputs
    }

    /// `Σ_x p(x) ρ_x`.
    pub fn average_output(&self, px: &InputDistribution) -> Result<DensityMatrix> {
        if px.len() != self.input_size() {
            return Err(Error::Validation(format!(
                "input distribution has {} letters, channel has {}",
                px.len(),
                self.input_size()
            )));
        }
        let refs: Vec<&DensityMatrix> = self.outputs.iter().collect();
        Ok(DensityMatrix::mixture_unchecked(px.probabilities(), &refs))
    }

    /// True when every output is rank one.
    pub fn has_pure_outputs(&self, tol: &Tolerances) -> bool {
        self.outputs.iter().all(|o| o.is_pure(tol))
    }
}

/// Binary pure-state channel with output overlap `f`, in the gauge
/// `|ψ⟩ = |0⟩`, `|φ⟩ = f|0⟩ + √(1−f²)|1⟩`.
pub fn bpc(f: f64) -> Result<CqChannel> {
    check_probability("fidelity", f)?;
    let psi = PureState::basis(2, 0);
    let phi = PureState::from_real(&[f, (1.0 - f * f).max(0.0).sqrt()])?;
    CqChannel::new(vec![projector(&psi), projector(&phi)])
}

/// Output `x` becomes the diagonal state carrying row `x` of `c`.
pub fn embed_classical(c: &ClassicalChannel) -> CqChannel {
    let outputs = c
        .rows()
        .iter()
        .map(|row| {
            DensityMatrix::from_hermitian_unchecked(HermitianMatrix::from_real_diagonal(row))
        })
        .collect();
    CqChannel { outputs }
}

/// Wiretap channel `W_B / W_C`: the classical input is copied to both
/// reductions, so the joint output on letter `x` is `ρ_B^x ⊗ ρ_C^x`.
#[derive(Debug, Clone, PartialEq)]
pub struct WiretapChannel {
    bob: CqChannel,
    charlie: CqChannel,
}

impl WiretapChannel {
    pub fn new(bob: CqChannel, charlie: CqChannel) -> Result<Self> {
        if bob.input_size() != charlie.input_size() {
            return Err(Error::Composition(format!(
                "Bob's reduction takes {} letters but Charlie's takes {}",
                bob.input_size(),
                charlie.input_size()
            )));
        }
        Ok(Self { bob, charlie })
    }

    pub fn bob(&self) -> &CqChannel {
        &self.bob
    }

    pub fn charlie(&self) -> &CqChannel {
        &self.charlie
    }

    pub fn input_size(&self) -> usize {
        self.bob.input_size()
    }

    /// Bob's and Charlie's outputs for input letter `x`.
    pub fn evaluate(&self, x: usize) -> (&DensityMatrix, &DensityMatrix) {
        (self.bob.output(x), self.charlie.output(x))
    }

    /// Joint output `ρ_B^x ⊗ ρ_C^x`.
    pub fn joint_output(&self, x: usize) -> Result<DensityMatrix> {
        self.bob.output(x).tensor(self.charlie.output(x))
    }

    /// `W^{⊗n}`; letters are indexed big-endian in base `input_size`.
    pub fn tensor_power(&self, n: usize) -> Result<WiretapChannel> {
        self.tensor_power_with(n, &Tolerances::DEFAULT)
    }

    pub fn tensor_power_with(&self, n: usize, tol: &Tolerances) -> Result<WiretapChannel> {
        if n == 0 {
            return Err(Error::Validation("tensor power needs n >= 1".into()));
        }
        Ok(WiretapChannel {
            bob: cq_tensor_power(&self.bob, n, tol)?,
            charlie: cq_tensor_power(&self.charlie, n, tol)?,
        })
    }
}

/// Shorthand for [`WiretapChannel::new`].
pub fn wiretap(bob: CqChannel, charlie: CqChannel) -> Result<WiretapChannel> {
    WiretapChannel::new(bob, charlie)
}

fn checked_pow(base: usize, n: usize, cap: usize) -> Result<usize> {
    let mut acc: usize = 1;
    for _ in 0..n {
        acc = acc
            .checked_mul(base)
            .filter(|&v| v <= cap)
            .ok_or(Error::Size {
                required: base.saturating_pow(n as u32),
                cap,
            })?;
    }
    Ok(acc)
}

fn cq_tensor_power(c: &CqChannel, n: usize, tol: &Tolerances) -> Result<CqChannel> {
    checked_pow(c.output_dim(), n, tol.dim_cap)?;
    // The alphabet grows the same way; keep it under the same cap.
    let letters = checked_pow(c.input_size(), n, tol.dim_cap)?;
    let mut outputs = Vec::with_capacity(letters);
    for word in 0..letters {
        let digits = digits_big_endian(word, c.input_size(), n);
        let mut acc = c.output(digits[0]).clone();
        for &d in &digits[1..] {
            acc = acc.tensor(c.output(d))?;
        }
        outputs.push(acc);
    }
    Ok(CqChannel { outputs })
}

pub(crate) fn digits_big_endian(mut word: usize, base: usize, n: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    for slot in digits.iter_mut().rev() {
        *slot = word % base;
        word /= base;
    }
    digits
}

/// Probability vector over the classical input alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct InputDistribution(Vec<f64>);

impl InputDistribution {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::Validation("empty input distribution".into()));
        }
        if probabilities.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::Validation(
                "input distribution has negative entries".into(),
            ));
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > Tolerances::DEFAULT.probability {
            return Err(Error::Validation(format!(
                "input distribution sums to {sum}"
            )));
        }
        Ok(Self(probabilities))
    }

    /// `(q, 1 − q)`: `q` is the weight on letter 0.
    pub fn binary(q: f64) -> Result<Self> {
        check_probability("q", q)?;
        Ok(Self(vec![q, 1.0 - q]))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn point_mass(n: usize, x: usize) -> Self {
        let mut p = vec![0.0; n];
        p[x] = 1.0;
        Self(p)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for InputDistribution {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<InputDistribution> for Vec<f64> {
    fn from(d: InputDistribution) -> Self {
        d.0
    }
}

/// The two named families used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `BPC(r) / BEC((1−r)²)`: quantum legitimate receiver.
    Bob,
    /// `BSC(p) / BPC(1−2p)`: quantum adversary.
    Eve,
}

impl Family {
    pub fn channel(self, param: f64) -> Result<WiretapChannel> {
        match self {
            Family::Bob => quantum_bob(param),
            Family::Eve => quantum_eve(param),
        }
    }
}

/// `BPC(r)` to Bob, `BEC((1−r)²)` to Charlie.
pub fn quantum_bob(r: f64) -> Result<WiretapChannel> {
    check_probability("r", r)?;
    WiretapChannel::new(bpc(r)?, embed_classical(&bec((1.0 - r) * (1.0 - r))?))
}

/// `BSC(p)` to Bob, `BPC(1−2p)` to Charlie.
pub fn quantum_eve(p: f64) -> Result<WiretapChannel> {
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::domain("p", p, "[0, 0.5]"));
    }
    WiretapChannel::new(embed_classical(&bsc(p)?), bpc(1.0 - 2.0 * p)?)
}

/// One reduction in a JSON channel description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ReductionConfig {
    Bsc {
        param: f64,
    },
    Bec {
        param: f64,
    },
    Bpc {
        param: f64,
    },
    /// Explicit outputs: `outputs[x][i][j] = [re, im]`.
    Cq {
        outputs: Vec<Vec<Vec<[f64; 2]>>>,
    },
}

impl ReductionConfig {
    pub fn build(&self) -> Result<CqChannel> {
        match self {
            ReductionConfig::Bsc { param } => Ok(embed_classical(&bsc(*param)?)),
            ReductionConfig::Bec { param } => Ok(embed_classical(&bec(*param)?)),
            ReductionConfig::Bpc { param } => bpc(*param),
            ReductionConfig::Cq { outputs } => {
                let states = outputs
                    .iter()
                    .map(|rows| {
                        let dim = rows.len();
                        if rows.iter().any(|r| r.len() != dim) {
                            return Err(Error::Validation(
                                "cq output is not a square matrix".into(),
                            ));
                        }
                        let entries = rows
                            .iter()
                            .flatten()
                            .map(|&[re, im]| C64::new(re, im))
                            .collect();
                        DensityMatrix::new(HermitianMatrix::new(dim, entries)?)
                    })
                    .collect::<Result<Vec<_>>>()?;
                CqChannel::new(states)
            }
        }
    }

    /// Explicit description of an existing reduction.
    pub fn explicit(c: &CqChannel) -> Self {
        let outputs = c
            .outputs()
            .iter()
            .map(|o| {
                let n = o.dim();
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| {
                                let z = o.as_hermitian().get(i, j);
                                [z.re, z.im]
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        ReductionConfig::Cq { outputs }
    }
}

/// JSON channel description: `{"bob": {...}, "charlie": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub bob: ReductionConfig,
    pub charlie: ReductionConfig,
}

impl ChannelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel config always serializes")
    }

    pub fn build(&self) -> Result<WiretapChannel> {
        WiretapChannel::new(self.bob.build()?, self.charlie.build()?)
    }

    pub fn explicit(w: &WiretapChannel) -> Self {
        Self {
            bob: ReductionConfig::explicit(w.bob()),
            charlie: ReductionConfig::explicit(w.charlie()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bsc_examples() {
        assert_eq!(bsc(0.0).unwrap().rows(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(bsc(0.5).unwrap().rows(), &[vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert_eq!(bsc(0.1).unwrap().rows(), &[vec![0.9, 0.1], vec![0.1, 0.9]]);
        assert!(matches!(bsc(1.2), Err(Error::Domain { .. })));
        assert!(bsc(-0.1).is_err());
    }

    #[test]
    fn bec_examples() {
        assert_eq!(
            bec(0.0).unwrap().rows(),
            &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]
        );
        assert_eq!(
            bec(1.0).unwrap().rows(),
            &[vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]]
        );
        let r: f64 = 0.5;
        let c = bec((1.0 - r).powi(2)).unwrap();
        assert_eq!(c.row(0)[ERASURE_SYMBOL], 0.25);
        assert!(bec(f64::NAN).is_err());
    }

    #[test]
    fn bpc_examples() {
        let c = bpc(0.0).unwrap();
        assert!(
            c.output(0)
                .as_hermitian()
                .max_abs_diff(&HermitianMatrix::from_real_diagonal(&[1.0, 0.0]))
                < 1e-15
        );
        assert!(
            c.output(1)
                .as_hermitian()
                .max_abs_diff(&HermitianMatrix::from_real_diagonal(&[0.0, 1.0]))
                < 1e-15
        );
        let c = bpc(1.0).unwrap();
        assert_eq!(c.output(0), c.output(1));
        // Charlie's overlap in the quantum-adversary family at p = 0.1.
        let c = bpc(1.0 - 2.0 * 0.1).unwrap();
        let ov = c
            .output(0)
            .as_hermitian()
            .trace_product(c.output(1).as_hermitian())
            .sqrt();
        assert!((ov - 0.8).abs() < 1e-12);
        assert!(bpc(1.5).is_err());
    }

    #[test]
    fn bpc_overlap_on_grid() {
        for k in 0..=100 {
            let f = k as f64 / 100.0;
            let c = bpc(f).unwrap();
            // |⟨ψ|φ⟩|² = Tr[|ψ⟩⟨ψ| |φ⟩⟨φ|]
            let ov = c
                .output(0)
                .as_hermitian()
                .trace_product(c.output(1).as_hermitian())
                .sqrt();
            assert!((ov - f).abs() < 1e-12, "f = {f}: {ov}");
        }
    }

    #[test]
    fn embedding_examples() {
        let c = embed_classical(&bsc(0.0).unwrap());
        assert_eq!(
            c.output(0).as_hermitian(),
            &HermitianMatrix::from_real_diagonal(&[1.0, 0.0])
        );
        assert_eq!(
            c.output(1).as_hermitian(),
            &HermitianMatrix::from_real_diagonal(&[0.0, 1.0])
        );
        let c = embed_classical(&bec(1.0).unwrap());
        let e = HermitianMatrix::from_real_diagonal(&[0.0, 0.0, 1.0]);
        assert_eq!(c.output(0).as_hermitian(), &e);
        assert_eq!(c.output(1).as_hermitian(), &e);
        let c = embed_classical(&bsc(0.1).unwrap());
        assert_eq!(
            c.output(0).as_hermitian(),
            &HermitianMatrix::from_real_diagonal(&[0.9, 0.1])
        );
    }

    #[test]
    fn wiretap_rejects_mismatched_inputs() {
        let three = embed_classical(&ClassicalChannel::new(vec![vec![1.0]; 3]).unwrap());
        let err = WiretapChannel::new(bpc(0.3).unwrap(), three).unwrap_err();
        assert!(matches!(err, Error::Composition(_)));
    }

    #[test]
    fn joint_output_is_product() {
        let w = quantum_bob(0.5).unwrap();
        let j = w.joint_output(1).unwrap();
        assert_eq!(j.dim(), 6);
        assert!((j.as_hermitian().trace() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tensor_power_bookkeeping() {
        let w = quantum_bob(0.5).unwrap();
        let w1 = w.tensor_power(1).unwrap();
        assert_eq!(w1, w);
        let w2 = w.tensor_power(2).unwrap();
        assert_eq!(w2.input_size(), 4);
        assert_eq!(w2.bob().output_dim(), 4);
        assert_eq!(w2.charlie().output_dim(), 9);
        let w3 = quantum_eve(0.1).unwrap().tensor_power(3).unwrap();
        assert_eq!(w3.input_size(), 8);
        for o in w3.charlie().outputs() {
            assert_eq!(o.dim(), 8);
            let ev = o.eigenvalues();
            assert!((ev[0] - 1.0).abs() < 1e-12 && ev[1..].iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn tensor_power_respects_cap() {
        let tol = Tolerances {
            dim_cap: 16,
            ..Tolerances::DEFAULT
        };
        let w = quantum_eve(0.1).unwrap();
        assert!(matches!(
            w.tensor_power_with(5, &tol),
            Err(Error::Size { .. })
        ));
    }

    #[test]
    fn config_round_trip() {
        let text =
            r#"{"bob": {"kind": "bpc", "param": 0.3}, "charlie": {"kind": "bec", "param": 0.49}}"#;
        let cfg = ChannelConfig::from_json(text).unwrap();
        let w = cfg.build().unwrap();
        let named = quantum_bob(0.3).unwrap();
        for x in 0..2 {
            assert!(
                w.charlie()
                    .output(x)
                    .as_hermitian()
                    .max_abs_diff(named.charlie().output(x).as_hermitian())
                    < 1e-15
            );
            assert_eq!(w.bob().output(x), named.bob().output(x));
        }
        let explicit = ChannelConfig::explicit(&w);
        let back = ChannelConfig::from_json(&explicit.to_json())
            .unwrap()
            .build()
            .unwrap();
        for x in 0..2 {
            assert!(
                back.bob()
                    .output(x)
                    .as_hermitian()
                    .max_abs_diff(w.bob().output(x).as_hermitian())
                    <= 1e-15
            );
            assert!(
                back.charlie()
                    .output(x)
                    .as_hermitian()
                    .max_abs_diff(w.charlie().output(x).as_hermitian())
                    <= 1e-15
            );
        }
    }

    #[test]
    fn config_parse_errors_carry_position() {
        let err = ChannelConfig::from_json(
            "{\n  \"bob\": {\"kind\": \"bsc\", \"param\": 0.1},\n  \"charlie\": ",
        )
        .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(ChannelConfig::from_json(
            r#"{"bob": {"kind": "nope"}, "charlie": {"kind": "bsc", "param": 0.1}}"#
        )
        .is_err());
    }

    #[test]
    fn config_rejects_invalid_states() {
        let text = r#"{"bob": {"kind": "cq", "outputs": [[[[2,0],[0,0]],[[0,0],[0,0]]]]},
                       "charlie": {"kind": "bsc", "param": 0.1}}"#;
        assert!(matches!(
            ChannelConfig::from_json(text).unwrap().build(),
            Err(Error::Validation(_))
        ));
    }
}

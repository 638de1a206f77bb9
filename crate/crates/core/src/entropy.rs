//! Entropies, the private-information integrand `f_W`, and the closed-form
//! second derivatives of `f_W` for the two named channel families.
//!
//! Everything is reported in bits unless a function says otherwise. The one
//! exception is [`d2f_bob_closed`], whose natural form comes out in nats;
//! [`d2f_bob_closed_bits`] applies the conversion.

use std::f64::consts::LN_2;

use crate::channels::{InputDistribution, WiretapChannel};
use crate::error::{check_open_unit, check_probability, Error, Result};
use crate::linalg::{eigenvalues_with, DensityMatrix, HermitianMatrix};
use crate::tolerances::Tolerances;

/// Smallest finite-difference step accepted by [`d2f_numeric`].
pub const MIN_FD_STEP: f64 = 1e-7;

/// Default finite-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> Result<f64> {
    check_probability("p", p)?;
    Ok(h2_unchecked(p))
}

/// Binary entropy without the domain check; arguments are clamped to [0, 1].
pub(crate) fn h2_unchecked(p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    -xlog2x(p) - xlog2x(1.0 - p)
}

/// Shannon entropy of a probability vector in bits (`0 log 0 = 0`).
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter().map(|&x| xlog2x(x)).sum::<f64>()
}

/// `−Σ λ log₂ λ`, treating eigenvalues below `clip` as zero.
pub fn entropy_of_spectrum(values: &[f64], clip: f64) -> f64 {
    -values
        .iter()
        .filter(|&&v| v > clip)
        .map(|&v| xlog2x(v))
        .sum::<f64>()
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    von_neumann_entropy_with(rho, &Tolerances::DEFAULT)
}

pub fn von_neumann_entropy_with(rho: &DensityMatrix, tol: &Tolerances) -> f64 {
    hermitian_entropy(rho.as_hermitian(), tol)
}

pub(crate) fn hermitian_entropy(m: &HermitianMatrix, tol: &Tolerances) -> f64 {
    entropy_of_spectrum(&eigenvalues_with(m, tol), tol.eigenvalue_clip)
}

fn check_input(w: &WiretapChannel, px: &InputDistribution) -> Result<()> {
    if px.len() != w.input_size() {
        return Err(Error::Validation(format!(
            "input distribution has {} letters, channel has {}",
            px.len(),
            w.input_size()
        )));
    }
    Ok(())
}

/// `I(X:B) − I(X:C)` for the cq state produced by feeding `px` into `w`.
pub fn f_w(w: &WiretapChannel, px: &InputDistribution) -> Result<f64> {
    check_input(w, px)?;
    let tol = Tolerances::DEFAULT;
    let mut conditional = 0.0;
    for (x, &p) in px.probabilities().iter().enumerate() {
        if p > 0.0 {
            let (b, c) = w.evaluate(x);
            conditional +=
                p * (von_neumann_entropy_with(b, &tol) - von_neumann_entropy_with(c, &tol));
        }
    }
    Ok(g_w(w, px)? - conditional)
}

/// `H(B) − H(C)` on the average outputs.
pub fn g_w(w: &WiretapChannel, px: &InputDistribution) -> Result<f64> {
    check_input(w, px)?;
    let tol = Tolerances::DEFAULT;
    let hb = von_neumann_entropy_with(&w.bob().average_output(px)?, &tol);
    let hc = von_neumann_entropy_with(&w.charlie().average_output(px)?, &tol);
    Ok(hb - hc)
}

/// `f_W` restricted to binary inputs, `q ↦ f_W(w, (q, 1−q))`, with the
/// per-letter entropies computed once.
#[derive(Debug, Clone)]
pub struct BinaryObjective {
    bob: [HermitianMatrix; 2],
    charlie: [HermitianMatrix; 2],
    /// `H(ρ_B^x) − H(ρ_C^x)` for x = 0, 1.
    letter_gap: [f64; 2],
    tol: Tolerances,
}

impl BinaryObjective {
    pub fn new(w: &WiretapChannel) -> Result<Self> {
        Self::with_tolerances(w, &Tolerances::DEFAULT)
    }

    pub fn with_tolerances(w: &WiretapChannel, tol: &Tolerances) -> Result<Self> {
        if w.input_size() != 2 {
            return Err(Error::Unsupported(format!(
                "binary objective needs a binary input, channel has {} letters",
                w.input_size()
            )));
        }
        let pick = |c: &crate::channels::CqChannel| {
            [
                c.output(0).as_hermitian().clone(),
                c.output(1).as_hermitian().clone(),
            ]
        };
        let bob = pick(w.bob());
        let charlie = pick(w.charlie());
        let letter_gap =
            [0, 1].map(|x| hermitian_entropy(&bob[x], tol) - hermitian_entropy(&charlie[x], tol));
        Ok(Self {
            bob,
            charlie,
            letter_gap,
            tol: *tol,
        })
    }

    fn mixed_entropy(&self, pair: &[HermitianMatrix; 2], q: f64) -> f64 {
        let mut m = pair[1].scaled(1.0 - q);
        m.add_scaled(q, &pair[0]);
        hermitian_entropy(&m, &self.tol)
    }

    /// `f_W` at input `(q, 1−q)`; `q` is clamped to [0, 1].
    pub fn value(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        let g = self.mixed_entropy(&self.bob, q) - self.mixed_entropy(&self.charlie, q);
        g - q * self.letter_gap[0] - (1.0 - q) * self.letter_gap[1]
    }

    /// `g_W` at input `(q, 1−q)`.
    pub fn g_value(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        self.mixed_entropy(&self.bob, q) - self.mixed_entropy(&self.charlie, q)
    }

    /// `H(ρ_B^x) − H(ρ_C^x)`.
    pub fn letter_gap(&self, x: usize) -> f64 {
        self.letter_gap[x]
    }
}

/// `g̃(r, q) = √(1 − 4(1−r²)q(1−q))`: Bob's average output for the
/// quantum-Bob family has eigenvalues `½(1 ± g̃)`.
pub fn g_tilde(r: f64, q: f64) -> f64 {
    (1.0 - 4.0 * (1.0 - r * r) * q * (1.0 - q)).max(0.0).sqrt()
}

/// `g(p, q) = √(1 − 16p(1−p)q(1−q))`: Charlie's average output for the
/// quantum-Eve family has eigenvalues `½(1 ± g)`.
pub fn g_eve(p: f64, q: f64) -> f64 {
    (1.0 - 16.0 * p * (1.0 - p) * q * (1.0 - q)).max(0.0).sqrt()
}

/// `½(1 ± g)` in non-increasing order.
pub fn qubit_eigenvalues(g: f64) -> [f64; 2] {
    [0.5 * (1.0 + g), 0.5 * (1.0 - g)]
}

/// Closed-form `d²f/dq²` for the quantum-Bob family, in nats.
///
/// `(1/g̃²)·[4(1−r)³(1+r) + (2r−1)/((1−q)q) − 4r²(1−r²)·artanh(g̃)/g̃]`
pub fn d2f_bob_closed(r: f64, q: f64) -> Result<f64> {
    check_open_unit("r", r)?;
    check_open_unit("q", q)?;
    let g = g_tilde(r, q);
    let bracket = 4.0 * (1.0 - r).powi(3) * (1.0 + r) + (2.0 * r - 1.0) / ((1.0 - q) * q)
        - 4.0 * r * r * (1.0 - r * r) * g.atanh() / g;
    Ok(bracket / (g * g))
}

/// [`d2f_bob_closed`] converted to bits.
pub fn d2f_bob_closed_bits(r: f64, q: f64) -> Result<f64> {
    Ok(d2f_bob_closed(r, q)? / LN_2)
}

/// Closed-form `d²f/dq²` for the quantum-Eve family, in bits.
pub fn d2f_eve_closed(p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::domain("p", p, "(0, 0.5)"));
    }
    check_open_unit("q", q)?;
    let c = 1.0 - 16.0 * p * (1.0 - p) * q * (1.0 - q);
    let sc = c.sqrt();
    let shift = p * (1.0 - 2.0 * q);
    let first = (1.0 - 2.0 * p).powi(2) / ((q + shift) * (1.0 - q - shift));
    let middle = 4.0 * p * (1.0 - p) * (1.0 - 2.0 * q).powi(2) / (c * (1.0 - q) * q);
    let last = 8.0 * (1.0 - 2.0 * p).powi(2) * p * (1.0 - p) * ((1.0 - sc) / (1.0 + sc)).ln()
        / c.powf(1.5);
    Ok(-(first - middle + last) / LN_2)
}

/// Central second difference of `q ↦ f_W(w, (q, 1−q))`.
pub fn d2f_numeric(w: &WiretapChannel, q: f64, step: f64) -> Result<f64> {
    let obj = BinaryObjective::new(w)?;
    d2f_numeric_objective(&obj, q, step)
}

pub(crate) fn d2f_numeric_objective(obj: &BinaryObjective, q: f64, step: f64) -> Result<f64> {
    if !(step >= MIN_FD_STEP) {
        return Err(Error::Validation(format!(
            "finite-difference step {step:e} is below {MIN_FD_STEP:e} and would be dominated by rounding"
        )));
    }
    if !(q - step > 0.0 && q + step < 1.0) {
        return Err(Error::domain("q ± step", q, "(0, 1)"));
    }
    Ok((obj.value(q + step) - 2.0 * obj.value(q) + obj.value(q - step)) / (step * step))
}

/// Closed form next to its finite-difference counterpart, both in bits.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SecondDerivativeReport {
    pub q: f64,
    pub closed_form: f64,
    pub finite_difference: f64,
    pub step: f64,
}

impl SecondDerivativeReport {
    pub fn discrepancy(&self) -> f64 {
        (self.closed_form - self.finite_difference).abs()
    }
}

/// Report for the quantum-Bob family at `(r, q)`.
pub fn bob_second_derivative(r: f64, q: f64, step: f64) -> Result<SecondDerivativeReport> {
    let closed_form = d2f_bob_closed_bits(r, q)?;
    let finite_difference = d2f_numeric(&crate::channels::quantum_bob(r)?, q, step)?;
    Ok(SecondDerivativeReport {
        q,
        closed_form,
        finite_difference,
        step,
    })
}

/// Report for the quantum-Eve family at `(p, q)`.
pub fn eve_second_derivative(p: f64, q: f64, step: f64) -> Result<SecondDerivativeReport> {
    let closed_form = d2f_eve_closed(p, q)?;
    let finite_difference = d2f_numeric(&crate::channels::quantum_eve(p)?, q, step)?;
    Ok(SecondDerivativeReport {
        q,
        closed_form,
        finite_difference,
        step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{
        bpc, bsc, embed_classical, quantum_bob, quantum_eve, wiretap, CqChannel,
    };
    use crate::linalg::hermitian_eigenvalues;

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(h2(0.5).unwrap(), 1.0);
        assert_eq!(h2(0.0).unwrap(), 0.0);
        assert_eq!(h2(1.0).unwrap(), 0.0);
        assert!((h2(0.25).unwrap() - 0.811_278_124_459_132_8).abs() < 1e-15);
        assert!((h2(0.25).unwrap() - shannon_entropy(&[0.25, 0.75])).abs() < 1e-15);
        assert!(matches!(h2(1.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn von_neumann_examples() {
        let pure = bpc(0.3).unwrap();
        assert!(von_neumann_entropy(pure.output(1)).abs() < 1e-12);
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(2)) - 1.0).abs() < 1e-14);
        let c = bpc(1.0 - 2.0 * 0.1).unwrap();
        let avg = c.average_output(&InputDistribution::uniform(2)).unwrap();
        let oracle = shannon_entropy(&qubit_eigenvalues(1.0 - 2.0 * 0.1));
        assert!((von_neumann_entropy(&avg) - oracle).abs() < 1e-12);
        assert!((oracle - 0.468_995_593_589_281).abs() < 1e-12);
    }

    #[test]
    fn f_w_examples() {
        let u = InputDistribution::uniform(2);
        let v = f_w(&quantum_bob(0.5).unwrap(), &u).unwrap();
        let h = h2(0.25).unwrap();
        assert!((v - (h - (h + 0.75) + h)).abs() < 1e-12);
        let v = f_w(&quantum_eve(0.1).unwrap(), &u).unwrap();
        assert!((v - (1.0 - 2.0 * h2(0.1).unwrap())).abs() < 1e-12);
        let c = bpc(0.4).unwrap();
        let same = wiretap(c.clone(), c).unwrap();
        assert!(
            f_w(&same, &InputDistribution::binary(0.3).unwrap())
                .unwrap()
                .abs()
                < 1e-14
        );
    }

    #[test]
    fn g_w_examples_and_identity() {
        let w = quantum_bob(0.5).unwrap();
        let u = InputDistribution::uniform(2);
        assert!((g_w(&w, &u).unwrap() + 0.75).abs() < 1e-12);
        for q in [0.1, 0.37, 0.8] {
            let px = InputDistribution::binary(q).unwrap();
            let lhs = f_w(&w, &px).unwrap();
            let rhs = g_w(&w, &px).unwrap()
                - q * g_w(&w, &InputDistribution::point_mass(2, 0)).unwrap()
                - (1.0 - q) * g_w(&w, &InputDistribution::point_mass(2, 1)).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn f_w_vanishes_on_point_masses() {
        for w in [quantum_bob(0.4).unwrap(), quantum_eve(0.2).unwrap()] {
            for x in 0..2 {
                assert!(f_w(&w, &InputDistribution::point_mass(2, x)).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn f_w_rejects_size_mismatch() {
        let w = quantum_bob(0.4).unwrap();
        assert!(matches!(
            f_w(&w, &InputDistribution::uniform(3)),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn binary_objective_matches_f_w() {
        let w = quantum_eve(0.12).unwrap();
        let obj = BinaryObjective::new(&w).unwrap();
        for k in 0..=20 {
            let q = k as f64 / 20.0;
            let direct = f_w(&w, &InputDistribution::binary(q).unwrap()).unwrap();
            assert!((obj.value(q) - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn bob_closed_form_is_symmetric() {
        let a = d2f_bob_closed(0.5, 0.3).unwrap();
        let b = d2f_bob_closed(0.5, 0.7).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!(d2f_bob_closed(0.5, 0.0).is_err());
    }

    #[test]
    fn bob_closed_form_vanishes_at_threshold() {
        let r_hat = 0.542_386_59;
        assert!(d2f_bob_closed(r_hat, 0.5).unwrap().abs() < 1e-6);
    }

    #[test]
    fn bob_closed_form_matches_finite_difference() {
        let rep = bob_second_derivative(0.5, 0.5, DEFAULT_FD_STEP).unwrap();
        assert!(rep.discrepancy() < 1e-5, "{rep:?}");
    }

    #[test]
    fn eve_closed_form_midpoint_reduction() {
        for p in [0.05f64, 0.1, 0.2, 0.3] {
            let reduced = 4.0 / LN_2
                * (2.0 * p * (1.0 - p) * ((1.0 - p) / p).ln() - (1.0 - 2.0 * p).powi(3))
                / (1.0 - 2.0 * p);
            assert!((d2f_eve_closed(p, 0.5).unwrap() - reduced).abs() < 1e-10);
        }
        assert!(d2f_eve_closed(0.124_120_25, 0.5).unwrap().abs() < 1e-6);
        assert!(d2f_eve_closed(0.5, 0.5).is_err());
    }

    #[test]
    fn eve_closed_form_matches_finite_difference() {
        let rep = eve_second_derivative(0.1, 0.3, DEFAULT_FD_STEP).unwrap();
        assert!(rep.discrepancy() < 1e-5, "{rep:?}");
    }

    #[test]
    fn numeric_second_derivative_examples() {
        // Bob == Charlie makes f identically zero.
        let c = embed_classical(&bsc(0.2).unwrap());
        let same = wiretap(c.clone(), c).unwrap();
        assert!(d2f_numeric(&same, 0.4, 1e-4).unwrap().abs() < 1e-6);
        assert!(d2f_numeric(&quantum_bob(0.6).unwrap(), 0.5, 1e-4).unwrap() > 0.0);
        assert!(d2f_numeric(&quantum_eve(0.13).unwrap(), 0.5, 1e-4).unwrap() > 0.0);
        assert!(d2f_numeric(&same, 0.4, 1e-9).is_err());
        assert!(d2f_numeric(&same, 0.0, 1e-4).is_err());
    }

    #[test]
    fn closed_form_eigenvalues_small_grid() {
        for i in 0..=4 {
            for j in 0..=4 {
                let (r, q) = (i as f64 / 4.0, j as f64 / 4.0);
                let w = quantum_bob(r).unwrap();
                let avg = w
                    .bob()
                    .average_output(&InputDistribution::binary(q).unwrap())
                    .unwrap();
                let ev = hermitian_eigenvalues(avg.as_hermitian());
                let cf = qubit_eigenvalues(g_tilde(r, q));
                assert!((ev[0] - cf[0]).abs() < 1e-12 && (ev[1] - cf[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_charlie_gives_bob_mutual_information() {
        let bob = embed_classical(&bsc(0.0).unwrap());
        let charlie = CqChannel::new(vec![DensityMatrix::maximally_mixed(2); 2]).unwrap();
        let w = wiretap(bob, charlie).unwrap();
        let obj = BinaryObjective::new(&w).unwrap();
        assert!((obj.value(0.25) - h2(0.25).unwrap()).abs() < 1e-14);
    }
}

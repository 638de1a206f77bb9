//! Small derivative-free solvers: bisection, golden-section search and
//! Nelder–Mead. Nothing here knows about channels.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Root of `f` on `[lo, hi]` by bisection; `f(lo)` and `f(hi)` must have
/// opposite signs (or one of them be zero).
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::Solver("bracket endpoints are not finite".into()));
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Solver(format!(
            "no sign change on [{lo}, {hi}]: f = {flo:e}, {fhi:e}"
        )));
    }
    // 200 halvings exhaust f64 resolution on any bracket.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Maximizer of a unimodal `f` on `[a, b]` by golden-section search.
/// Returns `(x, f(x))`, where the endpoints are also candidates.
pub fn golden_max(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    // The cap only matters when `tol` is below the float spacing near the
    // bracket; 200 golden steps shrink any interval by ~1e-42.
    let mut steps = 0;
    while hi - lo > tol && steps < 200 {
        steps += 1;
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for x in [a, b] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Settings for [`nelder_mead`].
#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Initial simplex edge length.
    pub step: f64,
    pub max_evals: usize,
    /// Stop when the spread of function values on the simplex is below this.
    pub f_tol: f64,
    /// ... and the simplex diameter is below this.
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            step: 0.5,
            max_evals: 4000,
            f_tol: 1e-13,
            x_tol: 1e-10,
        }
    }
}

/// Minimizes `f` from `x0` with the adaptive Nelder–Mead coefficients of
/// Gao and Han. Returns the best point seen and its value.
pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    opts: NelderMeadOptions,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if n == 0 {
        let v = eval(x0);
        return (Vec::new(), v);
    }
    let nf = n as f64;
    let alpha = 1.0;
    let beta = 1.0 + 2.0 / nf;
    let gamma = 0.75 - 1.0 / (2.0 * nf);
    let delta = 1.0 - 1.0 / nf;

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.step;
        let v = eval(&x);
        simplex.push((x, v));
    }
    let mut evals = n + 1;
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));

    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(ai, bi)| ai + t * (bi - ai)).collect()
    };
    let vertex_sum = |simplex: &[(Vec<f64>, f64)]| {
        let mut sum = vec![0.0; n];
        for (x, _) in simplex {
            for (s, xi) in sum.iter_mut().zip(x) {
                *s += xi;
            }
        }
        sum
    };
    // The simplex stays sorted and the vertex sum is updated in place, so an
    // iteration costs O(n) outside of function evaluations. The sum is rebuilt
    // periodically to keep rounding drift out of the centroid.
    let mut sum = vertex_sum(&simplex);
    let mut since_rebuild = 0usize;

    while evals < opts.max_evals {
        let spread = simplex[n].1 - simplex[0].1;
        if spread.abs() <= opts.f_tol {
            let diameter = simplex[1..]
                .iter()
                .map(|(x, _)| {
                    x.iter()
                        .zip(&simplex[0].0)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if diameter <= opts.x_tol {
                break;
            }
        }
        if since_rebuild >= n {
            sum = vertex_sum(&simplex);
            since_rebuild = 0;
        }
        since_rebuild += 1;

        let worst = &simplex[n].0;
        let centroid: Vec<f64> = sum.iter().zip(worst).map(|(s, w)| (s - w) / nf).collect();
        let (fbest, fsecond, fworst) = (simplex[0].1, simplex[n - 1].1, simplex[n].1);

        let replacement = 'step: {
            let xr = combine(&centroid, worst, -alpha);
            let fr = eval(&xr);
            evals += 1;
            if fr < fbest {
                let xe = combine(&centroid, worst, -alpha * beta);
                let fe = eval(&xe);
                evals += 1;
                break 'step Some(if fe < fr { (xe, fe) } else { (xr, fr) });
            }
            if fr < fsecond {
                break 'step Some((xr, fr));
            }
            let t = if fr < fworst { -alpha * gamma } else { gamma };
            let xc = combine(&centroid, worst, t);
            let fc = eval(&xc);
            evals += 1;
            if fc < fr.min(fworst) {
                break 'step Some((xc, fc));
            }
            None
        };

        match replacement {
            Some((x, v)) => {
                let (old, _) = simplex.pop().expect("n + 1 vertices");
                for ((s, a), b) in sum.iter_mut().zip(&x).zip(&old) {
                    *s += a - b;
                }
                let at = simplex.partition_point(|p| p.1.total_cmp(&v).is_le());
                simplex.insert(at, (x, v));
            }
            None => {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x = combine(&best, &vertex.0, delta);
                    let v = eval(&x);
                    *vertex = (x, v);
                }
                evals += n;
                simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
                sum = vertex_sum(&simplex);
                since_rebuild = 0;
            }
        }
    }
    simplex
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("simplex is never empty")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bisection_needs_a_bracket() {
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(Error::Solver(_))
        ));
    }

    #[test]
    fn golden_section_on_parabola() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3) + 1.0, 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn golden_section_terminates_below_float_resolution() {
        let (x, _) = golden_max(|x| -(x - 1e-15).abs(), 0.0, 2e-15, 0.0);
        assert!((x - 1e-15).abs() < 1e-29);
    }

    #[test]
    fn golden_section_prefers_boundary_when_monotone() {
        let (x, _) = golden_max(|x| x, 0.0, 1.0, 1e-9);
        assert_eq!(x, 1.0);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions {
            max_evals: 20_000,
            ..Default::default()
        };
        let (x, v) = nelder_mead(rosen, &[-1.2, 1.0], opts);
        assert!(v < 1e-12, "{v}");
        assert!((x[0] - 1.0).abs() < 1e-5 && (x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn nelder_mead_quadratic_in_six_dims() {
        let q = |x: &[f64]| {
            x.iter()
                .enumerate()
                .map(|(i, v)| (i as f64 + 1.0) * (v - 0.1 * i as f64).powi(2))
                .sum()
        };
        let (_, v) = nelder_mead(q, &[0.0; 6], NelderMeadOptions::default());
        assert!(v < 1e-10, "{v}");
    }
}

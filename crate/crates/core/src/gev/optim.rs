//! Derivative-free simplex minimizer (Nelder-Mead).
//!
//! Infeasible points are handled by letting the objective return
//! `f64::INFINITY`; the simplex contracts away from them, so hard
//! constraints need no penalty shaping.

pub(crate) struct NmOptions {
    pub max_iters: usize,
    /// Relative simplex-diameter convergence threshold.
    pub rel_tol: f64,
}

pub(crate) struct NmResult<const N: usize> {
    pub point: [f64; N],
    pub value: f64,
    pub converged: bool,
    #[allow(dead_code)]
    pub iterations: usize,
}

/// Minimize `f` starting from `start`, with per-coordinate initial steps.
pub(crate) fn minimize<const N: usize>(
    f: impl Fn(&[f64; N]) -> f64,
    start: [f64; N],
    step: [f64; N],
    opts: &NmOptions,
) -> NmResult<N> {
    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const RHO: f64 = 0.5; // contraction
    const SIGMA: f64 = 0.5; // shrink

    let mut simplex: Vec<[f64; N]> = Vec::with_capacity(N + 1);
    simplex.push(start);
    for i in 0..N {
        let mut v = start;
        v[i] += step[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(&f).collect();

    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        iterations += 1;

        // order best..worst (INFINITY sorts after finite values)
        let mut order: Vec<usize> = (0..=N).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[N];
        let second_worst = order[N - 1];

        if simplex_diameter(&simplex, &simplex[best]) < opts.rel_tol {
            converged = true;
            break;
        }

        // centroid of all but the worst vertex
        let mut centroid = [0.0; N];
        for (vi, v) in simplex.iter().enumerate() {
            if vi == worst {
                continue;
            }
            for d in 0..N {
                centroid[d] += v[d];
            }
        }
        for c in centroid.iter_mut() {
            *c /= N as f64;
        }

        let reflected = blend(&centroid, &simplex[worst], -ALPHA);
        let f_reflected = f(&reflected);

        if f_reflected < values[best] {
            let expanded = blend(&centroid, &simplex[worst], -GAMMA);
            let f_expanded = f(&expanded);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }

        let contracted = if f_reflected < values[worst] {
            blend(&centroid, &reflected, RHO)
        } else {
            blend(&centroid, &simplex[worst], RHO)
        };
        let f_contracted = f(&contracted);
        if f_contracted < values[worst].min(f_reflected) {
            simplex[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }

        // shrink toward the best vertex
        let anchor = simplex[best];
        for vi in 0..=N {
            if vi == best {
                continue;
            }
            simplex[vi] = blend(&anchor, &simplex[vi], SIGMA);
            values[vi] = f(&simplex[vi]);
        }
    }

    let (mut point, mut value) = (simplex[0], values[0]);
    for vi in 1..=N {
        if values[vi] < value {
            point = simplex[vi];
            value = values[vi];
        }
    }
    NmResult {
        point,
        value,
        converged,
        iterations,
    }
}

/// `centroid + weight * (vertex - centroid)`.
fn blend<const N: usize>(centroid: &[f64; N], vertex: &[f64; N], weight: f64) -> [f64; N] {
    let mut out = [0.0; N];
    for d in 0..N {
        out[d] = centroid[d] + weight * (vertex[d] - centroid[d]);
    }
    out
}

/// Largest per-coordinate distance from `anchor`, relative to its magnitude.
fn simplex_diameter<const N: usize>(simplex: &[[f64; N]], anchor: &[f64; N]) -> f64 {
    let mut d = 0.0f64;
    for v in simplex {
        for i in 0..N {
            d = d.max((v[i] - anchor[i]).abs() / (1.0 + anchor[i].abs()));
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> NmOptions {
        NmOptions {
            max_iters: 10_000,
            rel_tol: 1e-8,
        }
    }

    #[test]
    fn minimizes_shifted_quadratic() {
        let f = |x: &[f64; 3]| (x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2) + (x[2] - 0.5).powi(2);
        let r = minimize(f, [0.0, 0.0, 0.0], [0.5, 0.5, 0.5], &opts());
        assert!(r.converged);
        assert!((r.point[0] - 1.0).abs() < 1e-6);
        assert!((r.point[1] + 2.0).abs() < 1e-6);
        assert!((r.point[2] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn minimizes_rosenbrock() {
        let f = |x: &[f64; 2]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = minimize(f, [-1.2, 1.0], [0.5, 0.5], &opts());
        assert!(r.converged);
        assert!((r.point[0] - 1.0).abs() < 1e-4, "x = {:?}", r.point);
        assert!((r.point[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn contracts_away_from_infeasible_region() {
        // feasible only for x > 0, minimum at x = 2
        let f = |x: &[f64; 1]| {
            if x[0] <= 0.0 {
                f64::INFINITY
            } else {
                (x[0] - 2.0).powi(2)
            }
        };
        let r = minimize(f, [0.5, ], [-1.0], &opts());
        assert!(r.converged);
        assert!((r.point[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn reports_iteration_cap() {
        let f = |x: &[f64; 2]| x[0].powi(2) + x[1].powi(2);
        let r = minimize(
            f,
            [10.0, 10.0],
            [1.0, 1.0],
            &NmOptions {
                max_iters: 3,
                rel_tol: 1e-12,
            },
        );
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }
}

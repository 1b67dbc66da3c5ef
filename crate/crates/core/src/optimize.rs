//! Local ascent for ratios of positively homogeneous functions,
//! `r(z) = num(z) / den(z)`, with (super/sub)gradients supplied by the caller.
//!
//! Iterates stay on the unit sphere of the parameter space. Steps follow the
//! normalized gradient of r with a backtracking line search; when the line
//! search stalls (typically at a kink of a max-type denominator) a few seeded
//! random directions are tried before giving up.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{dot, norm2};

/// One evaluation of numerator and denominator with gradients.
#[derive(Debug, Clone)]
pub struct RatioEval {
    pub num: f64,
    pub den: f64,
    pub grad_num: Vec<f64>,
    pub grad_den: Vec<f64>,
}

impl RatioEval {
    pub fn ratio(&self) -> f64 {
        if self.den > 0.0 {
            self.num / self.den
        } else {
            0.0
        }
    }
}

pub trait RatioObjective {
    fn dim(&self) -> usize;

    fn evaluate(&self, z: &[f64]) -> RatioEval;

    /// Orthogonal projection onto the admissible subspace (identity by default).
    fn project(&self, _z: &mut [f64]) {}
}

#[derive(Debug, Clone, Copy)]
pub struct AscentOptions {
    pub max_iter: usize,
    /// Stop when the relative gain over `window` iterations drops below this.
    pub rel_tol: f64,
    pub window: usize,
    pub perturbations: usize,
    pub seed: u64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self {
            max_iter: 150,
            rel_tol: 1e-9,
            window: 10,
            perturbations: 3,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AscentResult {
    pub z: Vec<f64>,
    pub ratio: f64,
    pub eval: RatioEval,
    pub iterations: usize,
    pub evaluations: usize,
}

fn normalize(z: &mut [f64]) -> f64 {
    let r = norm2(z);
    if r > 0.0 {
        z.iter_mut().for_each(|v| *v /= r);
    }
    r
}

fn step(z: &[f64], dir: &[f64], t: f64) -> Vec<f64> {
    z.iter().zip(dir).map(|(a, d)| a + t * d).collect()
}

/// Maximizes `num/den` starting from `z0`. Returns the start itself if it is
/// degenerate (zero after projection).
pub fn ratio_ascent<O: RatioObjective + ?Sized>(
    obj: &O,
    z0: &[f64],
    opts: AscentOptions,
) -> AscentResult {
    let mut z = z0.to_vec();
    obj.project(&mut z);
    let mut evaluations = 0;
    if normalize(&mut z) == 0.0 {
        let eval = obj.evaluate(&z);
        return AscentResult {
            z,
            ratio: 0.0,
            eval,
            iterations: 0,
            evaluations: 1,
        };
    }
    let mut cur = obj.evaluate(&z);
    evaluations += 1;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut t = 0.25;
    let mut history = vec![cur.ratio()];
    let mut perturbations_left = opts.perturbations;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let r = cur.ratio();
        if cur.den <= 0.0 {
            break;
        }
        let mut g: Vec<f64> = cur
            .grad_num
            .iter()
            .zip(&cur.grad_den)
            .map(|(a, b)| (a - r * b) / cur.den)
            .collect();
        obj.project(&mut g);
        let radial = dot(&g, &z);
        g.iter_mut().zip(&z).for_each(|(gi, zi)| *gi -= radial * zi);
        let mut accepted = None;
        if normalize(&mut g) > 0.0 {
            let mut tt = t;
            while tt > 1e-9 {
                let mut cand = step(&z, &g, tt);
                normalize(&mut cand);
                let e = obj.evaluate(&cand);
                evaluations += 1;
                if e.ratio() > r * (1.0 + 1e-14) + 1e-300 {
                    accepted = Some((cand, e, tt));
                    break;
                }
                tt *= 0.5;
            }
        }
        if accepted.is_none() && perturbations_left > 0 {
            perturbations_left -= 1;
            let mut d: Vec<f64> = (0..z.len())
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            obj.project(&mut d);
            let radial = dot(&d, &z);
            d.iter_mut().zip(&z).for_each(|(di, zi)| *di -= radial * zi);
            if normalize(&mut d) > 0.0 {
                let mixed: Vec<f64> = g.iter().zip(&d).map(|(a, b)| a + b).collect();
                for tt in [1e-2, 1e-3, 1e-4] {
                    let mut cand = step(&z, &mixed, tt);
                    obj.project(&mut cand);
                    normalize(&mut cand);
                    let e = obj.evaluate(&cand);
                    evaluations += 1;
                    if e.ratio() > r * (1.0 + 1e-14) + 1e-300 {
                        accepted = Some((cand, e, tt));
                        break;
                    }
                }
            }
            if accepted.is_none() {
                continue;
            }
        }
        match accepted {
            Some((cand, e, tt)) => {
                z = cand;
                cur = e;
                t = (2.0 * tt).min(1.0);
            }
            None => break,
        }
        history.push(cur.ratio());
        if history.len() > opts.window {
            let old = history[history.len() - 1 - opts.window];
            let now = cur.ratio();
            if now - old <= opts.rel_tol * now.abs() {
                break;
            }
        }
    }
    let ratio = cur.ratio();
    AscentResult {
        z,
        ratio,
        eval: cur,
        iterations,
        evaluations,
    }
}

/// Smooth upper approximation `(Σ t_i^p)^{1/p}` of `max_i t_i` together with
/// its gradient, given the gradients of the terms. Never below the max and at
/// most `k^{1/p}` times it for k terms.
pub fn soft_max(values: &[f64], grads: &[Vec<f64>], p: f64) -> (f64, Vec<f64>) {
    let dim = grads.first().map_or(0, |g| g.len());
    let top = values.iter().cloned().fold(0.0_f64, f64::max);
    if top <= 0.0 {
        return (0.0, vec![0.0; dim]);
    }
    let s: f64 = values.iter().map(|v| (v.max(0.0) / top).powf(p)).sum();
    let value = top * s.powf(1.0 / p);
    let mut grad = vec![0.0; dim];
    for (v, g) in values.iter().zip(grads) {
        let w = (v.max(0.0) / value).powf(p - 1.0);
        if w > 0.0 {
            grad.iter_mut().zip(g).for_each(|(a, b)| *a += w * b);
        }
    }
    (value, grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// num = <c, z>, den = |z|_∞ on R^3: maximum |c|_1 at sign(c).
    struct LinearOverMax {
        c: Vec<f64>,
        p: f64,
    }

    impl RatioObjective for LinearOverMax {
        fn dim(&self) -> usize {
            self.c.len()
        }

        fn evaluate(&self, z: &[f64]) -> RatioEval {
            let terms: Vec<f64> = z.iter().map(|v| v.abs()).collect();
            let grads: Vec<Vec<f64>> = (0..z.len())
                .map(|i| {
                    let mut g = vec![0.0; z.len()];
                    g[i] = z[i].signum();
                    g
                })
                .collect();
            let (den, grad_den) = soft_max(&terms, &grads, self.p);
            RatioEval {
                num: dot(&self.c, z),
                den,
                grad_num: self.c.clone(),
                grad_den,
            }
        }
    }

    #[test]
    fn smoothed_max_ascent_reaches_vertex() {
        let obj = LinearOverMax {
            c: vec![1.0, -2.0, 0.5],
            p: 64.0,
        };
        let res = ratio_ascent(
            &obj,
            &[1.0, 0.0, 0.0],
            AscentOptions {
                max_iter: 500,
                ..Default::default()
            },
        );
        let exact = 3.5;
        // the smoothed denominator costs at most a factor 3^{1/64}
        assert!(res.ratio <= exact + 1e-12);
        assert!(
            res.ratio >= exact / 3f64.powf(1.0 / 64.0) - 1e-6,
            "{}",
            res.ratio
        );
    }

    #[test]
    fn soft_max_bounds() {
        let v = [0.3, 1.0, 0.9];
        let g = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let (s, grad) = soft_max(&v, &g, 32.0);
        assert!(s >= 1.0 && s <= 3f64.powf(1.0 / 32.0));
        assert!(grad[1] > grad[2] && grad[2] > grad[0]);
    }

    #[test]
    fn degenerate_start_returns_zero() {
        struct Zero;
        impl RatioObjective for Zero {
            fn dim(&self) -> usize {
                2
            }
            fn evaluate(&self, z: &[f64]) -> RatioEval {
                RatioEval {
                    num: 0.0,
                    den: 0.0,
                    grad_num: vec![0.0; z.len()],
                    grad_den: vec![0.0; z.len()],
                }
            }
        }
        assert_eq!(
            ratio_ascent(&Zero, &[0.0, 0.0], AscentOptions::default()).ratio,
            0.0
        );
    }
}

//! Compression to the top component, pushforward of states along the Berezin
//! channel, the certified proximity bound and empirical Hausdorff estimates
//! between the state spaces of B^m and B^n.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::berezin::{symbol_sup_norm, upper_symbol, BerezinChannel};
use crate::bridge::{combined_seminorm, BbBridge};
use crate::error::{check_dim, ProxError, Result};
use crate::exec;
use crate::group_rep::{highest_weight_embedding, make_irrep, Embedding, Irrep, QuadratureGrid};
use crate::linalg::{c, identity, kron, op_norm, CMat};
use crate::quantum_metric::{
    matrix_lipschitz, random_state, state_metric_placed, BridgeTerm, DirectSumSeminorm, Side,
    State, StateMetricOptions, Summand,
};

/// R = V*(S⊗I − I⊗T)V on H^{m+n}.
pub fn compress(embedding: &Embedding, s: &CMat, t: &CMat) -> Result<CMat> {
    let (m, n) = (embedding.m, embedding.n);
    check_dim(m + 1, s.nrows())?;
    check_dim(m + 1, s.ncols())?;
    check_dim(n + 1, t.nrows())?;
    check_dim(n + 1, t.ncols())?;
    let diff = kron(s, &identity(n + 1)) - kron(&identity(m + 1), t);
    Ok(embedding.v.adjoint() * diff * &embedding.v)
}

/// The state T ↦ μ(σ̌^m(σ^n_T)) of B^n, for μ a state of B^m and the
/// channel B^n → B^m.
pub fn pushforward_state(mu: &State, channel: &BerezinChannel) -> Result<State> {
    let rho = mu.as_density()?;
    let out = channel.apply_dual(rho)?;
    let herm = (&out + out.adjoint()) * c(0.5);
    State::density(herm)
}

/// Everything the (m, n) computations share: irreps, the embedding, both
/// channels and the bridge nodes.
#[derive(Debug, Clone)]
pub struct PairContext {
    pub m: usize,
    pub n: usize,
    pub grid: Arc<QuadratureGrid>,
    pub rep_m: Arc<Irrep>,
    pub rep_n: Arc<Irrep>,
    pub rep_top: Irrep,
    pub embedding: Embedding,
    /// T ↦ σ̌^m(σ^n_T), B^n → B^m; its dual pushes states of B^m to B^n.
    pub channel_mn: BerezinChannel,
    /// S ↦ σ̌^n(σ^m_S), B^m → B^n.
    pub channel_nm: BerezinChannel,
    pub bridge: Arc<BbBridge>,
}

impl PairContext {
    /// `grid` must integrate degree m + n exactly.
    pub fn new(m: usize, n: usize, grid: Arc<QuadratureGrid>) -> Result<Self> {
        Self::with_irreps(Arc::new(make_irrep(m)?), Arc::new(make_irrep(n)?), grid)
    }

    pub fn with_irreps(
        rep_m: Arc<Irrep>,
        rep_n: Arc<Irrep>,
        grid: Arc<QuadratureGrid>,
    ) -> Result<Self> {
        let (m, n) = (rep_m.n, rep_n.n);
        Ok(Self {
            m,
            n,
            rep_top: make_irrep(m + n)?,
            embedding: highest_weight_embedding(m, n)?,
            channel_mn: BerezinChannel::new(m, n, &grid)?,
            channel_nm: BerezinChannel::new(n, m, &grid)?,
            bridge: Arc::new(BbBridge::for_grid(m, n, &grid)),
            grid,
            rep_m,
            rep_n,
        })
    }

    /// L^B_m ∨ L^B_n ∨ γ⁻¹(N_mn ∨ N_mn*).
    pub fn seminorm(&self, gamma: f64) -> Result<DirectSumSeminorm> {
        combined_seminorm(
            gamma,
            Summand::Matrix(self.rep_m.clone()),
            Summand::Matrix(self.rep_n.clone()),
            BridgeTerm::Bb(self.bridge.clone()),
        )
    }

    pub fn compress(&self, s: &CMat, t: &CMat) -> Result<CMat> {
        compress(&self.embedding, s, t)
    }

    /// ‖σ^m_S − σ^n_T‖_∞, computed as ‖σ^{m+n}_R‖_∞.
    pub fn symbol_gap(&self, s: &CMat, t: &CMat) -> Result<f64> {
        let r = self.compress(s, t)?;
        Ok(symbol_sup_norm(&upper_symbol(
            &self.rep_top,
            &r,
            &self.grid,
        )?))
    }

    /// δ_m L^B_m(S) + ‖σ^m_S − σ^n_T‖_∞, checked against the direct value
    /// ‖S − σ̌^m(σ^n_T)‖.
    pub fn gambit_bound(&self, s: &CMat, t: &CMat, delta_m: f64) -> Result<GambitBound> {
        let lipschitz = matrix_lipschitz(&self.rep_m, s)?;
        let symbol_gap = self.symbol_gap(s, t)?;
        let bound = delta_m * lipschitz + symbol_gap;
        let direct = op_norm(&(s - self.channel_mn.apply(t)?));
        if direct > bound + GAMBIT_TOL {
            return Err(ProxError::ConsistencyViolation(format!(
                "‖S − σ̌(σ_T)‖ = {direct} exceeds the bound {bound}"
            )));
        }
        Ok(GambitBound {
            bound,
            direct,
            lipschitz,
            symbol_gap,
        })
    }
}

const GAMBIT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GambitBound {
    pub bound: f64,
    pub direct: f64,
    pub lipschitz: f64,
    pub symbol_gap: f64,
}

/// Builds the context on a grid exact to degree m + n + 2.
pub fn gambit_bound(m: usize, n: usize, s: &CMat, t: &CMat, delta_m: f64) -> Result<f64> {
    let grid = Arc::new(crate::group_rep::sphere_grid(m + n + 2)?);
    Ok(PairContext::new(m, n, grid)?
        .gambit_bound(s, t, delta_m)?
        .bound)
}

/// δ̂_n, γ̂^A_n and γ̂^B_n of one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelConstants {
    pub n: usize,
    pub delta: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
}

impl LevelConstants {
    /// γ̂_n = max(γ̂^A_n, γ̂^B_n).
    pub fn gamma(&self) -> f64 {
        self.gamma_a.max(self.gamma_b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxReport {
    pub m: usize,
    pub n: usize,
    pub d_m: usize,
    pub d_n: usize,
    pub delta_m: f64,
    pub delta_n: f64,
    #[serde(rename = "gammaA_m")]
    pub gamma_a_m: f64,
    #[serde(rename = "gammaB_m")]
    pub gamma_b_m: f64,
    #[serde(rename = "gammaA_n")]
    pub gamma_a_n: f64,
    #[serde(rename = "gammaB_n")]
    pub gamma_b_n: f64,
    pub gamma_used: f64,
    pub certified_bound: f64,
    pub empirical_hausdorff: f64,
    pub seed: u64,
    /// Exactness degree of the quadrature used for the pair.
    pub exact_degree: usize,
}

/// max{δ_m, δ_n} + max{γ^A_m, γ^B_m} + max{γ^A_n, γ^B_n}, with
/// empirical_hausdorff left at 0.
pub fn prox_upper_bound(
    m: usize,
    n: usize,
    constants: &BTreeMap<usize, LevelConstants>,
) -> Result<ProxReport> {
    let cm = constants.get(&m).ok_or(ProxError::MissingConstants(m))?;
    let cn = constants.get(&n).ok_or(ProxError::MissingConstants(n))?;
    Ok(ProxReport {
        m,
        n,
        d_m: m + 1,
        d_n: n + 1,
        delta_m: cm.delta,
        delta_n: cn.delta,
        gamma_a_m: cm.gamma_a,
        gamma_b_m: cm.gamma_b,
        gamma_a_n: cn.gamma_a,
        gamma_b_n: cn.gamma_b,
        gamma_used: cm.gamma() + cn.gamma(),
        certified_bound: cm.delta.max(cn.delta) + cm.gamma() + cn.gamma(),
        empirical_hausdorff: 0.0,
        seed: 0,
        exact_degree: 0,
    })
}

#[derive(Debug, Clone)]
pub struct HausdorffOptions {
    pub samples: usize,
    pub seed: u64,
    /// Also try mixtures of the paired state with the trace and keep the
    /// closest one.
    pub refine: bool,
    pub metric: StateMetricOptions,
}

impl Default for HausdorffOptions {
    fn default() -> Self {
        Self {
            samples: 32,
            seed: 0,
            refine: false,
            metric: StateMetricOptions::fast(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HausdorffEstimate {
    pub value: f64,
    /// Largest distance from a state of B^m to its pushforward.
    pub from_m: f64,
    /// Largest distance from a state of B^n to its pushforward.
    pub from_n: f64,
}

const REFINE_MIX: [f64; 2] = [0.25, 0.5];

/// Distances between seeded states and their Berezin pushforwards, in both
/// directions.
pub fn hausdorff_estimate(
    ctx: &PairContext,
    l: &DirectSumSeminorm,
    opts: &HausdorffOptions,
) -> Result<HausdorffEstimate> {
    let one_side = |side: Side| -> Result<f64> {
        let (dim, channel, other_dim) = match side {
            Side::Left => (ctx.m + 1, &ctx.channel_mn, ctx.n + 1),
            Side::Right => (ctx.n + 1, &ctx.channel_nm, ctx.m + 1),
        };
        let other = match side {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        };
        let salt = if side == Side::Left { 0 } else { 1 << 32 };
        let values = exec::map_indices(opts.samples, |i| -> Result<f64> {
            let mu = random_state(dim, opts.seed.wrapping_add(salt + i as u64))?;
            let nu = pushforward_state(&mu, channel)?;
            let mut best = state_metric_placed(l, (&mu, side), (&nu, other), &opts.metric)?.value;
            if opts.refine {
                let rho = nu.as_density()?;
                for s in REFINE_MIX {
                    let mixed = rho * c(1.0 - s) + identity(other_dim) * c(s / other_dim as f64);
                    let cand = State::density(mixed)?;
                    let v =
                        state_metric_placed(l, (&mu, side), (&cand, other), &opts.metric)?.value;
                    best = best.min(v);
                }
            }
            Ok(best)
        });
        values
            .into_iter()
            .try_fold(0.0, |acc, v| Ok(f64::max(acc, v?)))
    };
    let from_m = one_side(Side::Left)?;
    let from_n = one_side(Side::Right)?;
    Ok(HausdorffEstimate {
        value: from_m.max(from_n),
        from_m,
        from_n,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::berezin::upper_symbol_at;
    use crate::group_rep::{coherent_vector, sphere_grid, CosetPoint};
    use crate::linalg::{herm_op_norm, random_hermitian, trace};

    fn ctx(m: usize, n: usize) -> PairContext {
        PairContext::new(m, n, Arc::new(sphere_grid(m + n + 2).unwrap())).unwrap()
    }

    #[test]
    fn compress_trivial_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = highest_weight_embedding(3, 3).unwrap();
        let s = random_hermitian(4, &mut rng);
        assert!(compress(&e, &s, &s).unwrap().norm() < 1e-12);
        let e = highest_weight_embedding(2, 3).unwrap();
        let r = compress(&e, &identity(3), &CMat::zeros(4, 4)).unwrap();
        assert!((r - identity(6)).norm() < 1e-12);
    }

    #[test]
    fn compression_intertwines_symbols() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let e = highest_weight_embedding(2, 3).unwrap();
        let grid = sphere_grid(7).unwrap();
        for _ in 0..5 {
            let s = random_hermitian(3, &mut rng);
            let t = random_hermitian(4, &mut rng);
            let r = compress(&e, &s, &t).unwrap();
            for x in &grid.nodes {
                let lhs = upper_symbol_at(2, &s, x) - upper_symbol_at(3, &t, x);
                assert!((lhs - upper_symbol_at(5, &r, x)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn pushforward_preserves_the_trace_state() {
        let ctx = ctx(2, 3);
        let nu = pushforward_state(&State::tracial(3), &ctx.channel_mn).unwrap();
        assert!((nu.as_density().unwrap() - identity(4) * c(0.25)).norm() < 1e-12);
        let mu = random_state(3, 9).unwrap();
        let rho = pushforward_state(&mu, &ctx.channel_mn).unwrap();
        assert!((trace(rho.as_density().unwrap()).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pushforward_of_north_coherent_state_peaks_at_north() {
        let ctx = ctx(2, 2);
        let north = CosetPoint::new(0.0, 0.0).unwrap();
        let mu = State::pure(&coherent_vector(2, &north)).unwrap();
        let nu = pushforward_state(&mu, &ctx.channel_nm).unwrap();
        let eig = nalgebra::SymmetricEigen::new(nu.as_density().unwrap().clone());
        let top = eig.eigenvalues.imax();
        let v = eig.eigenvectors.column(top);
        assert!(v[0].norm() > 1.0 - 1e-10);
    }

    #[test]
    fn gambit_bound_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ctx = ctx(2, 3);
        let g = ctx.gambit_bound(&identity(3), &identity(4), 0.7).unwrap();
        assert!(g.bound.abs() < 1e-10);
        for _ in 0..5 {
            let s = random_hermitian(3, &mut rng);
            let t = random_hermitian(4, &mut rng);
            let g = ctx.gambit_bound(&s, &t, 0.62).unwrap();
            assert!(g.direct <= g.bound + 1e-8);
        }
    }

    #[test]
    fn symbol_gap_is_bounded_by_the_bridge() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ctx = ctx(2, 2);
        for _ in 0..5 {
            let s = random_hermitian(3, &mut rng);
            let t = random_hermitian(3, &mut rng);
            let gap = ctx.symbol_gap(&s, &t).unwrap();
            let n = ctx.bridge.sup(&s.adjoint(), &t.adjoint()).0;
            assert!(gap <= n + 1e-8);
            let r = ctx.compress(&s, &t).unwrap();
            assert!(gap <= herm_op_norm(&r) + 1e-10);
        }
    }

    #[test]
    fn prox_bound_is_symmetric() {
        let mut k = BTreeMap::new();
        k.insert(
            2,
            LevelConstants {
                n: 2,
                delta: 0.61,
                gamma_a: 0.62,
                gamma_b: 0.72,
            },
        );
        k.insert(
            3,
            LevelConstants {
                n: 3,
                delta: 0.64,
                gamma_a: 0.57,
                gamma_b: 0.62,
            },
        );
        let a = prox_upper_bound(2, 3, &k).unwrap();
        let b = prox_upper_bound(3, 2, &k).unwrap();
        assert_eq!(a.certified_bound, b.certified_bound);
        assert!((a.certified_bound - (0.64 + 0.72 + 0.62)).abs() < 1e-15);
        let d = prox_upper_bound(2, 2, &k).unwrap();
        assert!((d.certified_bound - (0.61 + 2.0 * 0.72)).abs() < 1e-15);
        assert!(matches!(
            prox_upper_bound(2, 5, &k),
            Err(ProxError::MissingConstants(5))
        ));
    }

    #[test]
    fn trace_states_sit_at_the_floor_gamma() {
        // (tI, 0) has L = t/γ, so every pair of states is at least γ apart.
        let ctx = ctx(1, 2);
        let gamma = 0.3;
        let l = ctx.seminorm(gamma).unwrap();
        let opts = StateMetricOptions::default();
        let mu = State::tracial(2);
        let nu = pushforward_state(&mu, &ctx.channel_mn).unwrap();
        let v = state_metric_placed(&l, (&mu, Side::Left), (&nu, Side::Right), &opts)
            .unwrap()
            .value;
        assert!((v - gamma).abs() < 1e-6, "{v}");
        let rho = random_state(2, 1).unwrap();
        let w = state_metric_placed(&l, (&rho, Side::Left), (&nu, Side::Right), &opts)
            .unwrap()
            .value;
        assert!(w > v, "{w} {v}");
    }

    #[test]
    fn hausdorff_estimate_is_deterministic() {
        let ctx = ctx(1, 2);
        let l = ctx.seminorm(1.5).unwrap();
        let opts = HausdorffOptions {
            samples: 3,
            seed: 4,
            ..Default::default()
        };
        let a = hausdorff_estimate(&ctx, &l, &opts).unwrap();
        let b = hausdorff_estimate(&ctx, &l, &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.value > 0.0);
        let refined = hausdorff_estimate(
            &ctx,
            &l,
            &HausdorffOptions {
                refine: true,
                ..opts
            },
        )
        .unwrap();
        assert!(refined.value <= a.value + 1e-12);
    }
}

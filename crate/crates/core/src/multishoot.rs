//! Multi-interval Picard iteration on an equal partition of `[a, b]`.
//!
//! Segment `j` carries its left value `βⱼ₋₁` and slope `γⱼ` (with `β₀ = α`,
//! `βₙ = β`). One iteration, in this order:
//!
//! 1. every segment rebuilds `(yⱼ, uⱼ)` from `(βⱼ₋₁, γⱼ)` by one Picard step
//!    anchored at `tⱼ₋₁`, then recomputes `Iⱼ = ∫ fⱼ` and `Jⱼ = ∫ (tⱼ − s) fⱼ`
//!    from the new polynomials;
//! 2. `β₁ = (1/n)[β + (n−1)α + (n−1)J₁ − Σᵣ₌₂ⁿ Jᵣ − h Σᵣ₌₁ⁿ⁻¹ (n−r) Iᵣ]`;
//! 3. `γ₁ = (β₁ − α − J₁)/h`, then `γⱼ = γⱼ₋₁ + Iⱼ₋₁` left to right;
//! 4. `βⱼ₋₁ = βⱼ − h γⱼ − Jⱼ` right to left for `j = n, …, 3`.
//!
//! Segment updates read only their own previous data; the sweeps are
//! sequential.

use crate::error::{Error, Result};
use crate::picard::{self, check_bounded, integrate_states, SolveOptions};
use crate::polynomial::{sup_distance, Polynomial};
use crate::problem::{SystemSpec, Unknown, U, Y};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Partition<T> {
    pub n: usize,
    pub h: T,
    /// `t₀ = a < t₁ < … < tₙ = b`.
    pub nodes: Vec<T>,
}

impl<T: Scalar> Partition<T> {
    pub fn new(a: T, b: T, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidOptions("number of subintervals must be positive".into()));
        }
        if !(a < b) {
            return Err(Error::InvalidSystem("empty interval: a must be less than b".into()));
        }
        let h = (b - a) / T::of_usize(n);
        let nodes = (0..=n)
            .map(|j| if j == n { b } else { a + h * T::of_usize(j) })
            .collect();
        Ok(Self { n, h, nodes })
    }

    /// Segment (1-based) containing `t`; nodes belong to the left segment.
    pub fn segment_of(&self, t: T) -> usize {
        (1..=self.n).find(|&j| t <= self.nodes[j]).unwrap_or(self.n)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegmentState<T> {
    /// 1-based segment index.
    pub j: usize,
    /// `βⱼ₋₁`.
    pub beta_left: T,
    /// `γⱼ`.
    pub gamma: T,
    /// Basepoint `tⱼ₋₁`.
    pub states: Vec<Polynomial<T>>,
    /// `Iⱼ = ∫_{tⱼ₋₁}^{tⱼ} fⱼ`.
    pub i_integral: T,
    /// `Jⱼ = ∫_{tⱼ₋₁}^{tⱼ} (tⱼ − s) fⱼ`.
    pub j_integral: T,
}

impl<T: Scalar> SegmentState<T> {
    pub fn y(&self) -> &Polynomial<T> {
        &self.states[Y]
    }

    pub fn u(&self) -> &Polynomial<T> {
        &self.states[U]
    }
}

/// Mismatch at interior node `tⱼ` between segment `j` and the node data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeContinuity<T> {
    pub node: usize,
    pub t: T,
    /// `|yⱼ(tⱼ) − βⱼ|`.
    pub value_gap: T,
    /// `|uⱼ(tⱼ) − γⱼ₊₁|`.
    pub slope_gap: T,
}

/// Node values and segment integrals after one full iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord<T> {
    pub k: usize,
    /// `β₀ … βₙ`.
    pub betas: Vec<T>,
    /// `γ₁ … γₙ`.
    pub gammas: Vec<T>,
    pub i_integrals: Vec<T>,
    pub j_integrals: Vec<T>,
    pub state_delta: T,
    pub unknown_delta: T,
    /// `|yₙ(b) − β|` for the freshly updated last segment.
    pub right_residual: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiSolution<T> {
    pub partition: Partition<T>,
    pub segments: Vec<SegmentState<T>>,
    /// `β₀ … βₙ` after the last iteration.
    pub betas: Vec<T>,
    pub continuity_report: Vec<NodeContinuity<T>>,
    /// `|yₙ(b) − β|`.
    pub right_residual: T,
    pub converged: bool,
    pub iterations_used: usize,
    pub trace: Vec<SweepRecord<T>>,
}

impl<T: Scalar> MultiSolution<T> {
    /// Concatenated `y` evaluated at `t`.
    pub fn y_at(&self, t: T) -> T {
        self.segments[self.partition.segment_of(t) - 1].y().evaluate(t)
    }

    pub fn u_at(&self, t: T) -> T {
        self.segments[self.partition.segment_of(t) - 1].u().evaluate(t)
    }

    pub fn max_continuity_gap(&self) -> T {
        self.continuity_report
            .iter()
            .map(|c| c.value_gap.max(c.slope_gap))
            .fold(T::zero(), T::max)
    }
}

fn require_slope_mode<T: Scalar>(spec: &SystemSpec<T>) -> Result<T> {
    spec.check()?;
    match (spec.unknown, spec.alpha()) {
        (Unknown::Slope, Some(alpha)) => Ok(alpha),
        _ => Err(Error::InvalidSystem(
            "the multi-interval iteration needs y(a) given and y'(a) unknown".into(),
        )),
    }
}

fn segment_integrals<T: Scalar>(
    spec: &SystemSpec<T>,
    states: &[Polynomial<T>],
    t0: T,
    t1: T,
    cap: usize,
) -> Result<(T, T)> {
    let f = spec.rhs[U].compose(states, Some(cap))?;
    Ok((f.definite_integral(t0, t1), f.weighted_integral(t0, t1)))
}

/// Linear initial data: `βⱼ` on the chord, every `γⱼ` the average slope.
pub fn init_multi<T: Scalar>(spec: &SystemSpec<T>, n: usize, opts: &SolveOptions) -> Result<Vec<SegmentState<T>>> {
    let alpha = require_slope_mode(spec)?;
    if n < 2 {
        return Err(Error::InvalidOptions(
            "init_multi needs at least two subintervals; use the single-interval solver".into(),
        ));
    }
    let part = Partition::new(spec.a, spec.b, n)?;
    let slope = (spec.beta - alpha) / spec.width();
    (1..=n)
        .map(|j| {
            let t0 = part.nodes[j - 1];
            let beta_left = alpha + (spec.beta - alpha) * T::of_usize(j - 1) / T::of_usize(n);
            let states: Vec<_> = spec
                .derived_inits_at(t0, beta_left, slope)?
                .into_iter()
                .map(|v| Polynomial::constant(t0, v))
                .collect();
            let (i_integral, j_integral) = segment_integrals(spec, &states, t0, part.nodes[j], opts.degree_cap)?;
            Ok(SegmentState {
                j,
                beta_left,
                gamma: slope,
                states,
                i_integral,
                j_integral,
            })
        })
        .collect()
}

/// One Picard step on segment `j`, anchored at `tⱼ₋₁`, with fresh `I`, `J`.
pub fn segment_update<T: Scalar>(
    spec: &SystemSpec<T>,
    seg: &SegmentState<T>,
    partition: &Partition<T>,
    opts: &SolveOptions,
    k: usize,
) -> Result<SegmentState<T>> {
    let diverged = || Error::Divergence {
        iteration: k,
        segment: Some(seg.j),
    };
    let (t0, t1) = (partition.nodes[seg.j - 1], partition.nodes[seg.j]);
    let cap = opts.degree_cap;
    let f = spec
        .rhs
        .iter()
        .map(|g| g.compose(&seg.states, Some(cap)))
        .collect::<Result<Vec<_>>>()
        .map_err(|_| diverged())?;
    let initial = spec.derived_inits_at(t0, seg.beta_left, seg.gamma)?;
    let states = integrate_states(&f, &initial, t0, opts.degree_limit(k)).map_err(|e| match e {
        Error::NonFinite { .. } => diverged(),
        other => other,
    })?;
    if !check_bounded(&states, t0, t1, opts.samples) {
        return Err(diverged());
    }
    let (i_integral, j_integral) = segment_integrals(spec, &states, t0, t1, cap).map_err(|_| diverged())?;
    if !i_integral.is_finite() || !j_integral.is_finite() {
        return Err(diverged());
    }
    Ok(SegmentState {
        states,
        i_integral,
        j_integral,
        ..seg.clone()
    })
}

/// `β₁` from the freshly updated segment integrals.
pub fn beta1_update<T: Scalar>(segments: &[SegmentState<T>], spec: &SystemSpec<T>, partition: &Partition<T>) -> T {
    let n = partition.n;
    let nf = T::of_usize(n);
    let alpha = spec.alpha().expect("slope-mode system");
    let j_tail = segments[1..].iter().fold(T::zero(), |acc, s| acc + s.j_integral);
    let i_weighted = segments[..n - 1]
        .iter()
        .fold(T::zero(), |acc, s| acc + T::of_usize(n - s.j) * s.i_integral);
    let nm1 = T::of_usize(n - 1);
    (spec.beta + nm1 * alpha + nm1 * segments[0].j_integral - j_tail - partition.h * i_weighted) / nf
}

/// `γ₁ … γₙ`, left to right, from `β₁` and the fresh integrals.
pub fn gamma_sweep<T: Scalar>(
    segments: &[SegmentState<T>],
    spec: &SystemSpec<T>,
    partition: &Partition<T>,
    beta1: T,
) -> Vec<T> {
    let alpha = spec.alpha().expect("slope-mode system");
    let mut gammas = Vec::with_capacity(partition.n);
    gammas.push((beta1 - alpha - segments[0].j_integral) / partition.h);
    for j in 2..=partition.n {
        let prev = gammas[j - 2];
        gammas.push(prev + segments[j - 2].i_integral);
    }
    gammas
}

/// `β₂ … βₙ₋₁`, right to left; empty for `n = 2`.
pub fn beta_sweep<T: Scalar>(
    segments: &[SegmentState<T>],
    spec: &SystemSpec<T>,
    partition: &Partition<T>,
    gammas: &[T],
) -> Vec<T> {
    let n = partition.n;
    if n < 3 {
        return Vec::new();
    }
    // out[j - 2] holds βⱼ for j = 2..n-1.
    let mut out = vec![T::zero(); n - 2];
    let mut right = spec.beta;
    for j in (3..=n).rev() {
        let left = right - partition.h * gammas[j - 1] - segments[j - 1].j_integral;
        out[j - 3] = left;
        right = left;
    }
    out
}

/// One full multi-interval iteration.
pub fn multi_step<T: Scalar>(
    spec: &SystemSpec<T>,
    partition: &Partition<T>,
    segments: &[SegmentState<T>],
    opts: &SolveOptions,
    k: usize,
) -> Result<(Vec<SegmentState<T>>, SweepRecord<T>)> {
    let alpha = spec.alpha().expect("slope-mode system");
    let mut next = segments
        .iter()
        .map(|s| segment_update(spec, s, partition, opts, k))
        .collect::<Result<Vec<_>>>()?;
    let beta1 = beta1_update(&next, spec, partition);
    let gammas = gamma_sweep(&next, spec, partition, beta1);
    let inner = beta_sweep(&next, spec, partition, &gammas);

    let mut betas = Vec::with_capacity(partition.n + 1);
    betas.push(alpha);
    betas.push(beta1);
    betas.extend(inner);
    betas.push(spec.beta);

    let mut state_delta = T::zero();
    let mut unknown_delta = T::zero();
    for (j, (new, old)) in next.iter_mut().zip(segments).enumerate() {
        let (t0, t1) = (partition.nodes[j], partition.nodes[j + 1]);
        for (p, q) in new.states.iter().zip(&old.states) {
            state_delta = state_delta.max(sup_distance(p, q, t0, t1, opts.samples));
        }
        new.gamma = gammas[j];
        new.beta_left = betas[j];
        unknown_delta = unknown_delta
            .max((new.gamma - old.gamma).abs())
            .max((new.beta_left - old.beta_left).abs());
    }
    if betas.iter().chain(&gammas).any(|v| !v.is_finite()) {
        return Err(Error::Divergence {
            iteration: k,
            segment: None,
        });
    }
    let last = next.last().expect("at least two segments");
    let record = SweepRecord {
        k,
        right_residual: (last.y().evaluate(spec.b) - spec.beta).abs(),
        i_integrals: next.iter().map(|s| s.i_integral).collect(),
        j_integrals: next.iter().map(|s| s.j_integral).collect(),
        betas,
        gammas,
        state_delta,
        unknown_delta,
    };
    Ok((next, record))
}

fn continuity<T: Scalar>(segments: &[SegmentState<T>], partition: &Partition<T>, betas: &[T]) -> Vec<NodeContinuity<T>> {
    (1..partition.n)
        .map(|j| {
            let t = partition.nodes[j];
            let seg = &segments[j - 1];
            NodeContinuity {
                node: j,
                t,
                value_gap: (seg.y().evaluate(t) - betas[j]).abs(),
                slope_gap: (seg.u().evaluate(t) - segments[j].gamma).abs(),
            }
        })
        .collect()
}

/// Runs the multi-interval iteration; `n = 1` delegates to [`picard::solve`].
pub fn solve_multi<T: Scalar>(spec: &SystemSpec<T>, n: usize, opts: &SolveOptions) -> Result<MultiSolution<T>> {
    opts.validate()?;
    let alpha = require_slope_mode(spec)?;
    let partition = Partition::new(spec.a, spec.b, n)?;
    if n == 1 {
        return Ok(from_single(spec, partition, alpha, picard::solve(spec, opts)?, opts)?);
    }
    let gamma_tol = T::of(opts.gamma_tol);
    let state_tol = T::of(opts.state_tol);
    let mut segments = init_multi(spec, n, opts)?;
    let mut trace = Vec::new();
    let mut converged = false;
    for k in 1..=opts.max_iterations {
        let (next, record) = multi_step(spec, &partition, &segments, opts, k)?;
        segments = next;
        let done = record.unknown_delta < gamma_tol && record.state_delta < state_tol;
        trace.push(record);
        if done {
            converged = true;
            break;
        }
    }
    let betas = trace.last().map(|r| r.betas.clone()).expect("at least one iteration");
    let last = &segments[n - 1];
    Ok(MultiSolution {
        continuity_report: continuity(&segments, &partition, &betas),
        right_residual: (last.y().evaluate(spec.b) - spec.beta).abs(),
        iterations_used: trace.len(),
        converged,
        betas,
        segments,
        partition,
        trace,
    })
}

fn from_single<T: Scalar>(
    spec: &SystemSpec<T>,
    partition: Partition<T>,
    alpha: T,
    sol: picard::Solution<T>,
    opts: &SolveOptions,
) -> Result<MultiSolution<T>> {
    let (i_integral, j_integral) = segment_integrals(spec, &sol.final_states, spec.a, spec.b, opts.degree_cap)?;
    let gamma = sol.final_unknown();
    let trace = sol
        .history
        .iter()
        .map(|it| SweepRecord {
            k: it.k,
            betas: vec![alpha, spec.beta],
            gammas: vec![it.unknown_value],
            i_integrals: Vec::new(),
            j_integrals: Vec::new(),
            state_delta: it.state_delta,
            unknown_delta: it.unknown_delta,
            right_residual: it.right_residual,
        })
        .collect();
    Ok(MultiSolution {
        segments: vec![SegmentState {
            j: 1,
            beta_left: alpha,
            gamma,
            states: sol.final_states.clone(),
            i_integral,
            j_integral,
        }],
        betas: vec![alpha, spec.beta],
        continuity_report: Vec::new(),
        right_residual: *sol.residual_trace.last().expect("at least one iteration"),
        converged: sol.converged,
        iterations_used: sol.iterations_used,
        partition,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::MultiPoly;
    use crate::problem::Boundary;

    fn constant_rhs(c: f64, b: f64, alpha: f64, beta: f64) -> SystemSpec<f64> {
        SystemSpec::second_order(0.0, b, MultiPoly::constant(3, c), Boundary::dirichlet(alpha, beta)).unwrap()
    }

    #[test]
    fn partition_nodes() {
        let p = Partition::new(0.0f64, 1.0, 3).unwrap();
        assert_eq!(p.nodes.len(), 4);
        assert_eq!(p.nodes[3], 1.0);
        assert!((p.nodes[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.segment_of(0.0), 1);
        assert_eq!(p.segment_of(0.5), 2);
        assert_eq!(p.segment_of(1.0), 3);
        assert!(Partition::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn init_examples() {
        let opts = SolveOptions::default();
        let s = init_multi(&constant_rhs(0.0, 1.0, 0.0, 1.0), 2, &opts).unwrap();
        assert_eq!(s[1].beta_left, 0.5);
        let s = init_multi(&constant_rhs(3.0, 2.0, 1.0, -1.0), 4, &opts).unwrap();
        assert!(s.iter().all(|seg| seg.gamma == -1.0));
        assert!(init_multi(&constant_rhs(0.0, 1.0, 0.0, 1.0), 1, &opts).is_err());
    }

    #[test]
    fn segment_update_integrals() {
        let opts = SolveOptions::default();
        let part = Partition::new(0.0, 2.0, 2).unwrap();

        let spec = constant_rhs(0.0, 2.0, 1.0, 3.0);
        let segs = init_multi(&spec, 2, &opts).unwrap();
        let s = segment_update(&spec, &segs[1], &part, &opts, 1).unwrap();
        assert_eq!(s.y().coeffs(), &[2.0, 1.0]);
        assert_eq!((s.i_integral, s.j_integral), (0.0, 0.0));

        let spec = constant_rhs(1.0, 2.0, 0.0, 0.0);
        let segs = init_multi(&spec, 2, &opts).unwrap();
        let s = segment_update(&spec, &segs[0], &part, &opts, 1).unwrap();
        assert_eq!((s.i_integral, s.j_integral), (1.0, 0.5));

        // f = -y with y ≡ c on the segment: I = -c·h.
        let f = MultiPoly::variable(3, 1).neg();
        let spec = SystemSpec::second_order(0.0, 2.0, f, Boundary::dirichlet(0.0, 4.0)).unwrap();
        let mut seg = init_multi(&spec, 2, &opts).unwrap()[1].clone();
        seg.states[0] = Polynomial::constant(1.0, 2.5);
        seg.states[1] = Polynomial::constant(1.0, 0.0);
        let updated = segment_update(&spec, &seg, &part, &opts, 1).unwrap();
        // New y is 2 + 0·(t−1) since β₁⁽⁰⁾ = 2 and u ≡ 0; f = −2 so I = −2.
        assert!((updated.i_integral + 2.0).abs() < 1e-15);
    }

    #[test]
    fn sweep_examples_for_constant_forcing() {
        let opts = SolveOptions::default();
        let spec = constant_rhs(1.0, 2.0, 0.0, 0.0);
        let part = Partition::new(0.0, 2.0, 2).unwrap();
        let segs: Vec<_> = init_multi(&spec, 2, &opts)
            .unwrap()
            .iter()
            .map(|s| segment_update(&spec, s, &part, &opts, 1).unwrap())
            .collect();
        let beta1 = beta1_update(&segs, &spec, &part);
        assert_eq!(beta1, -0.5);
        let gammas = gamma_sweep(&segs, &spec, &part, beta1);
        assert_eq!(gammas, vec![-1.0, 0.0]);
        assert!(beta_sweep(&segs, &spec, &part, &gammas).is_empty());
    }

    #[test]
    fn beta_sweep_three_segments() {
        let opts = SolveOptions::default();
        let spec = constant_rhs(1.0, 3.0, 0.0, 0.0);
        let part = Partition::new(0.0, 3.0, 3).unwrap();
        let segs: Vec<_> = init_multi(&spec, 3, &opts)
            .unwrap()
            .iter()
            .map(|s| segment_update(&spec, s, &part, &opts, 1).unwrap())
            .collect();
        let beta1 = beta1_update(&segs, &spec, &part);
        let gammas = gamma_sweep(&segs, &spec, &part, beta1);
        let inner = beta_sweep(&segs, &spec, &part, &gammas);
        assert_eq!(inner, vec![0.0 - gammas[2] - 0.5]);
        // Exact solution y = t(t − 3)/2 has y(2) = −1.
        assert!((inner[0] + 1.0).abs() < 1e-14);
        assert!((beta1 + 1.0).abs() < 1e-14);
    }

    #[test]
    fn free_particle_is_exact_after_one_iteration() {
        let opts = SolveOptions::default();
        for n in 2..=6 {
            let spec = constant_rhs(0.0, 1.5, -1.0, 2.0);
            let part = Partition::new(0.0, 1.5, n).unwrap();
            let segs = init_multi(&spec, n, &opts).unwrap();
            let (next, rec) = multi_step(&spec, &part, &segs, &opts, 1).unwrap();
            for seg in &next {
                for &t in &[part.nodes[seg.j - 1], part.nodes[seg.j]] {
                    assert!((seg.y().evaluate(t) - (-1.0 + 2.0 * t)).abs() < 1e-14);
                }
            }
            assert!(rec.unknown_delta < 1e-14);
        }
    }

    #[test]
    fn single_segment_delegates() {
        let f = MultiPoly::variable(3, 1).neg();
        let b = std::f64::consts::FRAC_PI_8;
        let spec = SystemSpec::second_order(0.0, b, f, Boundary::dirichlet(1.0, b.cos() + b.sin())).unwrap();
        let opts = SolveOptions::default();
        let multi = solve_multi(&spec, 1, &opts).unwrap();
        let single = picard::solve(&spec, &opts).unwrap();
        assert_eq!(multi.segments[0].states, single.final_states);
        assert_eq!(multi.iterations_used, single.iterations_used);
    }

    #[test]
    fn left_value_mode_is_rejected() {
        let spec = SystemSpec::second_order(0.0, 1.0, MultiPoly::zero(3), Boundary::slope_left(1.0, 0.0)).unwrap();
        assert!(solve_multi(&spec, 2, &SolveOptions::default()).is_err());
    }
}

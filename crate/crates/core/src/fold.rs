//! Pure sequential-execution primitives.
//!
//! Every sequential model in this crate is written as a pure step function
//! `(carry, input) -> (carry, output)` and executed with [`scan`]. Because the
//! step functions are generic over [`Scalar`], the same recursion runs on
//! plain `f64` values and on [`Dual`] numbers, which is how [`grad`] obtains
//! exact forward-mode derivatives of anything built on top of `scan`.
//! [`minimize`] is a bounded projected gradient descent with a backtracking
//! line search, sized for the small smoothing-parameter problems the models
//! produce.

use crate::error::{Error, Result};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Maximum optimizer iterations.
const MAX_ITERS: usize = 500;
/// Convergence threshold on the projected-gradient infinity norm.
const GRAD_TOL: f64 = 1e-6;
/// Convergence threshold on the backtracking step size.
const STEP_TOL: f64 = 1e-10;
/// Armijo sufficient-decrease constant.
const ARMIJO_C: f64 = 1e-4;
/// Objective values below this are treated as divergence.
const DIVERGENCE_FLOOR: f64 = -1e12;

/// Arithmetic shared by `f64` and [`Dual`] so step functions and objectives
/// can be evaluated with or without derivative tracking.
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    /// The underlying value (the primal part for dual numbers).
    fn value(self) -> f64;
    fn ln(self) -> Self;
    /// Maximum by value; ties and derivative selection follow the left side.
    fn max(self, other: Self) -> Self;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

/// A forward-mode dual number: value plus one directional derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    /// Primal value.
    pub re: f64,
    /// Derivative along the seeded direction.
    pub du: f64,
}

impl Dual {
    /// A constant with zero derivative.
    #[inline]
    pub fn constant(x: f64) -> Self {
        Dual { re: x, du: 0.0 }
    }

    /// A variable seeded with derivative 1.
    #[inline]
    pub fn variable(x: f64) -> Self {
        Dual { re: x, du: 1.0 }
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, rhs: Dual) -> Dual {
        Dual {
            re: self.re + rhs.re,
            du: self.du + rhs.du,
        }
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, rhs: Dual) -> Dual {
        Dual {
            re: self.re - rhs.re,
            du: self.du - rhs.du,
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, rhs: Dual) -> Dual {
        Dual {
            re: self.re * rhs.re,
            du: self.re * rhs.du + self.du * rhs.re,
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, rhs: Dual) -> Dual {
        Dual {
            re: self.re / rhs.re,
            du: (self.du * rhs.re - self.re * rhs.du) / (rhs.re * rhs.re),
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(self) -> Dual {
        Dual {
            re: -self.re,
            du: -self.du,
        }
    }
}

impl Scalar for Dual {
    #[inline]
    fn from_f64(x: f64) -> Self {
        Dual::constant(x)
    }
    #[inline]
    fn value(self) -> f64 {
        self.re
    }
    #[inline]
    fn ln(self) -> Self {
        Dual {
            re: self.re.ln(),
            du: self.du / self.re,
        }
    }
    #[inline]
    fn max(self, other: Self) -> Self {
        if self.re >= other.re {
            self
        } else {
            other
        }
    }
    #[inline]
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.du.is_finite()
    }
}

/// Final carry and per-step outputs of a [`scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult<S, Y> {
    pub final_carry: S,
    pub outputs: Vec<Y>,
}

/// Applies a pure transition function over `inputs`, threading the carry
/// state through each step and collecting the per-step outputs.
///
/// `outputs.len()` always equals `inputs.len()`; the empty input is rejected.
pub fn scan<S, X, Y, F>(step: F, init: S, inputs: &[X]) -> Result<ScanResult<S, Y>>
where
    X: Copy,
    F: Fn(S, X) -> (S, Y),
{
    if inputs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut carry = init;
    let mut outputs = Vec::with_capacity(inputs.len());
    for &x in inputs {
        let (next, y) = step(carry, x);
        carry = next;
        outputs.push(y);
    }
    Ok(ScanResult {
        final_carry: carry,
        outputs,
    })
}

/// Applies `f` to every element of `batch`, possibly in parallel, with the
/// output order matching the input order regardless of worker count.
pub fn batch_map<T, U, F>(f: F, batch: &[T]) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    batch.par_iter().map(f).collect()
}

/// Fallible [`batch_map`]. On failure, reports the smallest failing index so
/// the error is deterministic no matter how the work was scheduled.
pub fn try_batch_map<T, U, F>(f: F, batch: &[T]) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    use rayon::prelude::*;
    let results: Vec<Result<U>> = batch.par_iter().map(f).collect();
    let mut out = Vec::with_capacity(results.len());
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => out.push(v),
            Err(e) => {
                return Err(Error::BatchElement {
                    index,
                    source: Box::new(e),
                })
            }
        }
    }
    Ok(out)
}

/// A scalar objective that can be evaluated both on `f64` (value only) and on
/// [`Dual`] parameters (value plus one directional derivative).
pub trait Objective {
    fn eval<T: Scalar>(&self, params: &[T]) -> T;
}

/// Value and gradient of an objective at a parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GradResult {
    pub value: f64,
    pub gradient: Vec<f64>,
}

/// Computes the objective value and its gradient by seeding one dual-number
/// direction per parameter. Exact to floating-point rounding; no step-size
/// choices involved.
pub fn grad(objective: &impl Objective, params: &[f64]) -> Result<GradResult> {
    let value = objective.eval::<f64>(params);
    if !value.is_finite() {
        return Err(Error::NonFiniteObjective { param: None });
    }
    let mut gradient = Vec::with_capacity(params.len());
    let mut seeded: Vec<Dual> = params.iter().map(|&p| Dual::constant(p)).collect();
    for i in 0..params.len() {
        seeded[i].du = 1.0;
        let out = objective.eval::<Dual>(&seeded);
        seeded[i].du = 0.0;
        if !out.du.is_finite() {
            return Err(Error::NonFiniteObjective { param: Some(i) });
        }
        gradient.push(out.du);
    }
    Ok(GradResult { value, gradient })
}

fn clamp_to(x: f64, (lo, hi): (f64, f64)) -> f64 {
    x.clamp(lo, hi)
}

/// Minimizes `objective` over a box via projected gradient descent with a
/// backtracking (Armijo) line search.
///
/// Deterministic, never leaves the bounds, and never returns a point with a
/// higher objective than `init`. Stops when the projected-gradient infinity
/// norm drops below 1e-6, the line-search step shrinks below 1e-10, or 500
/// iterations elapse.
pub fn minimize(
    objective: &impl Objective,
    init: &[f64],
    bounds: &[(f64, f64)],
) -> Result<Vec<f64>> {
    if init.len() != bounds.len() {
        return Err(Error::InvalidInput(format!(
            "{} initial parameters but {} bounds",
            init.len(),
            bounds.len()
        )));
    }
    for (i, (&(lo, hi), &x)) in bounds.iter().zip(init).enumerate() {
        if lo > hi {
            return Err(Error::InvalidInput(format!(
                "bound {i} has lo {lo} > hi {hi}"
            )));
        }
        if x < lo || x > hi {
            return Err(Error::InvalidInput(format!(
                "initial parameter {i} ({x}) outside [{lo}, {hi}]"
            )));
        }
    }

    let mut x = init.to_vec();
    let mut value = objective.eval::<f64>(&x);
    if !value.is_finite() {
        return Err(Error::NonFiniteObjective { param: None });
    }
    if value < DIVERGENCE_FLOOR {
        return Err(Error::Divergence);
    }

    // Warm-started line search: reuse the last accepted step as the scale for
    // the next iteration's first trial.
    let mut t_start = 1.0_f64;
    for _ in 0..MAX_ITERS {
        let g = grad(objective, &x)?;
        value = g.value;
        if value < DIVERGENCE_FLOOR {
            return Err(Error::Divergence);
        }

        // Projected gradient: the feasible unit-step movement. Equals the raw
        // gradient in the interior of the box.
        let pg_inf = x
            .iter()
            .zip(&g.gradient)
            .zip(bounds)
            .map(|((&xi, &gi), &b)| (xi - clamp_to(xi - gi, b)).abs())
            .fold(0.0_f64, f64::max);
        if pg_inf < GRAD_TOL {
            break;
        }

        let mut t = (t_start * 4.0).min(1.0);
        let mut accepted = false;
        while t >= STEP_TOL {
            let cand: Vec<f64> = x
                .iter()
                .zip(&g.gradient)
                .zip(bounds)
                .map(|((&xi, &gi), &b)| clamp_to(xi - t * gi, b))
                .collect();
            if cand == x {
                // Fully blocked by the bounds; nothing to move.
                break;
            }
            let cand_value = objective.eval::<f64>(&cand);
            let directional: f64 = g
                .gradient
                .iter()
                .zip(&cand)
                .zip(&x)
                .map(|((&gi, &ci), &xi)| gi * (ci - xi))
                .sum();
            if cand_value.is_finite() && cand_value <= value + ARMIJO_C * directional {
                x = cand;
                value = cand_value;
                t_start = t;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        if value < DIVERGENCE_FLOOR {
            return Err(Error::Divergence);
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Quadratic {
        center: Vec<f64>,
    }

    impl Objective for Quadratic {
        fn eval<T: Scalar>(&self, params: &[T]) -> T {
            let mut acc = T::from_f64(0.0);
            for (&p, &c) in params.iter().zip(&self.center) {
                let d = p - T::from_f64(c);
                acc = acc + d * d;
            }
            acc
        }
    }

    struct Constant;

    impl Objective for Constant {
        fn eval<T: Scalar>(&self, _params: &[T]) -> T {
            T::from_f64(4.5)
        }
    }

    #[test]
    fn scan_matches_hand_trace() {
        // step (s, x) -> (s + x, s) emits the running total before adding.
        let r = scan(|s: f64, x: f64| (s + x, s), 0.0, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.final_carry, 6.0);
        assert_eq!(r.outputs, vec![0.0, 1.0, 3.0]);
    }

    #[test]
    fn scan_single_element() {
        let r = scan(|s: f64, x: f64| (s * x, x), 2.0, &[7.0]).unwrap();
        assert_eq!(r.outputs.len(), 1);
    }

    #[test]
    fn scan_identity_step_is_fixed_point() {
        let c = 3.25;
        let r = scan(|s: f64, _x: f64| (s, s), c, &[9.0; 11]).unwrap();
        assert_eq!(r.final_carry, c);
        assert!(r.outputs.iter().all(|&y| y == c));
    }

    #[test]
    fn scan_rejects_empty_input() {
        let r = scan(|s: f64, x: f64| (s + x, s), 0.0, &[]);
        assert!(matches!(r, Err(Error::EmptyInput)));
    }

    #[test]
    fn scan_step_purity() {
        let step = |s: f64, x: f64| (0.3 * x + 0.7 * s, s + x);
        let a = step(1.5, 2.5);
        let b = step(1.5, 2.5);
        assert_eq!(a, b);
    }

    #[test]
    fn scan_equals_imperative_loop_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let a: f64 = rng.gen_range(-1.0..1.0);
            let b: f64 = rng.gen_range(-1.0..1.0);
            let n = rng.gen_range(1..40);
            let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let init: f64 = rng.gen_range(-5.0..5.0);

            let step = |s: f64, x: f64| (a * x + b * s, s + x);
            let folded = scan(step, init, &xs).unwrap();

            let mut s = init;
            let mut outputs = Vec::new();
            for &x in &xs {
                outputs.push(s + x);
                s = a * x + b * s;
            }
            assert_eq!(folded.final_carry, s);
            for (y0, y1) in folded.outputs.iter().zip(&outputs) {
                assert!((y0 - y1).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn batch_map_negate() {
        let out = batch_map(|&x: &f64| -x, &[1.0, -2.0, 3.0]);
        assert_eq!(out, vec![-1.0, 2.0, -3.0]);
    }

    #[test]
    fn batch_map_empty() {
        let out: Vec<f64> = batch_map(|&x: &f64| x, &[]);
        assert!(out.is_empty());
    }

    #[test]
    fn batch_map_matches_sequential_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let batch: Vec<Vec<f64>> = (0..1000)
            .map(|_| {
                let n = rng.gen_range(1..20);
                (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect()
            })
            .collect();
        // Naive one-step forecast: repeat the last observation.
        let f = |s: &Vec<f64>| *s.last().unwrap();
        let parallel = batch_map(f, &batch);
        let sequential: Vec<f64> = batch.iter().map(f).collect();
        assert_eq!(parallel, sequential);
    }

    #[test]
    fn batch_map_is_permutation_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let batch: Vec<f64> = (0..200).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let f = |&x: &f64| x * x - 3.0 * x;
        let base = batch_map(f, &batch);

        let mut perm: Vec<usize> = (0..batch.len()).collect();
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let shuffled: Vec<f64> = perm.iter().map(|&i| batch[i]).collect();
        let mapped = batch_map(f, &shuffled);
        for (k, &i) in perm.iter().enumerate() {
            assert_eq!(mapped[k], base[i]);
        }
    }

    #[test]
    fn grad_reports_offending_parameter_index() {
        // x^1000 stays finite at x = 2.03 but its derivative 1000 * x^999
        // overflows, so only the parameter-0 dual pass goes non-finite.
        struct Explosive;
        impl Objective for Explosive {
            fn eval<T: Scalar>(&self, params: &[T]) -> T {
                let mut acc = T::from_f64(1.0);
                for _ in 0..1000 {
                    acc = acc * params[0];
                }
                acc + params[1]
            }
        }
        let r = grad(&Explosive, &[2.03, 0.0]);
        match r {
            Err(Error::NonFiniteObjective { param: Some(0) }) => {}
            other => panic!("expected param-0 failure, got {other:?}"),
        }
    }

    #[test]
    fn try_batch_map_reports_first_failing_index() {
        let batch = vec![1.0, -1.0, 2.0, -2.0];
        let r = try_batch_map(
            |&x: &f64| {
                if x < 0.0 {
                    Err(Error::InvalidInput("negative".into()))
                } else {
                    Ok(x)
                }
            },
            &batch,
        );
        match r {
            Err(Error::BatchElement { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected batch element error, got {other:?}"),
        }
    }

    #[test]
    fn grad_of_square() {
        let obj = Quadratic { center: vec![0.0] };
        let g = grad(&obj, &[3.0]).unwrap();
        assert_eq!(g.value, 9.0);
        assert_eq!(g.gradient, vec![6.0]);
    }

    #[test]
    fn grad_of_constant_is_zero() {
        let g = grad(&Constant, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(g.value, 4.5);
        assert!(g.gradient.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn grad_linearity() {
        struct Combo {
            a: f64,
            b: f64,
            f: Quadratic,
            g: Quadratic,
        }
        impl Objective for Combo {
            fn eval<T: Scalar>(&self, params: &[T]) -> T {
                T::from_f64(self.a) * self.f.eval(params) + T::from_f64(self.b) * self.g.eval(params)
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let f = Quadratic {
                center: vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
            };
            let g = Quadratic {
                center: vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
            };
            let a = rng.gen_range(-3.0..3.0);
            let b = rng.gen_range(-3.0..3.0);
            let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];

            let gf = grad(&f, &p).unwrap();
            let gg = grad(&g, &p).unwrap();
            let combo = Combo { a, b, f, g };
            let gc = grad(&combo, &p).unwrap();
            for i in 0..2 {
                let expect = a * gf.gradient[i] + b * gg.gradient[i];
                assert!((gc.gradient[i] - expect).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn grad_reports_non_finite_objective() {
        struct Bad;
        impl Objective for Bad {
            fn eval<T: Scalar>(&self, params: &[T]) -> T {
                params[0].ln()
            }
        }
        let r = grad(&Bad, &[-1.0]);
        assert!(matches!(r, Err(Error::NonFiniteObjective { .. })));
    }

    #[test]
    fn minimize_convex_1d() {
        let obj = Quadratic { center: vec![0.3] };
        let p = minimize(&obj, &[0.5], &[(0.0, 1.0)]).unwrap();
        assert!((p[0] - 0.3).abs() < 1e-4);
    }

    #[test]
    fn minimize_at_optimum_does_not_increase() {
        let obj = Quadratic { center: vec![0.3] };
        let init = [0.3];
        let v0 = obj.eval::<f64>(&init);
        let p = minimize(&obj, &init, &[(0.0, 1.0)]).unwrap();
        assert!(obj.eval::<f64>(&p) <= v0);
    }

    #[test]
    fn minimize_respects_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let center = vec![rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
            let obj = Quadratic { center };
            let bounds = [(0.0, 1.0), (-0.5, 0.5)];
            let init = [rng.gen_range(0.0..1.0), rng.gen_range(-0.5..0.5)];
            let v0 = obj.eval::<f64>(&init);
            let p = minimize(&obj, &init, &bounds).unwrap();
            for (pi, (lo, hi)) in p.iter().zip(bounds) {
                assert!(*pi >= lo && *pi <= hi);
            }
            assert!(obj.eval::<f64>(&p) <= v0);
        }
    }

    #[test]
    fn minimize_flags_divergence() {
        // Linear objective with no lower bound inside a huge box.
        struct Line;
        impl Objective for Line {
            fn eval<T: Scalar>(&self, params: &[T]) -> T {
                params[0] * T::from_f64(1e10)
            }
        }
        let r = minimize(&Line, &[0.0], &[(-1e6, 1e6)]);
        assert!(matches!(r, Err(Error::Divergence)));
    }

    #[test]
    fn minimize_rejects_out_of_bounds_init() {
        let obj = Quadratic { center: vec![0.0] };
        let r = minimize(&obj, &[2.0], &[(0.0, 1.0)]);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }
}

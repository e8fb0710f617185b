//! Adaptive linearly-implicit integrator for stiff autonomous systems.
//!
//! Six-stage Rosenbrock method of order 4 with an embedded order-3 solution
//! (Hairer & Wanner's RODAS4 coefficient set). Both solutions are stiffly
//! accurate and the scheme is L-stable, so very fast components relax onto
//! their quasi-steady values without restricting the step size.
//!
//! Stages are written in the transformed form
//!
//! ```text
//! (I/(hγ) - J) u_i = f(y + Σ_j a_ij u_j) + Σ_j c_ij u_j / h
//! ```
//!
//! so each step needs one LU factorization. Every stage is a linear
//! combination of right-hand sides mapped through the same matrix, so linear
//! invariants of the system are conserved to round-off.

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::Scalar;

/// `dy/dτ = f(y)` with an analytic Jacobian.
pub trait OdeSystem<S> {
    fn dim(&self) -> usize;
    fn rhs(&self, y: &[S], dy: &mut [S]);
    fn jacobian(&self, y: &[S], jac: &mut Matrix<S>);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl<S> {
    pub rtol: S,
    pub atol: S,
    /// First trial step; estimated from the initial slope when `None`.
    pub initial_step: Option<S>,
    pub max_steps: usize,
}

impl<S: Scalar> Default for StepControl<S> {
    fn default() -> Self {
        Self { rtol: S::lit(1e-8), atol: S::lit(1e-10), initial_step: None, max_steps: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegratorStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub jacobian_evals: usize,
    /// Largest weighted local error estimate among accepted steps (`<= 1`).
    pub max_error_estimate: f64,
}

const GAMMA: f64 = 0.25;
const A: [[f64; 4]; 4] = [
    [1.544, 0.0, 0.0, 0.0],
    [0.9466785280815826, 0.2557011698983284, 0.0, 0.0],
    [3.314825187068521, 2.896124015972201, 0.9986419139977817, 0.0],
    [1.221224509226641, 6.019134481288629, 12.53708332932087, -0.687886036105895],
];
const C: [[f64; 5]; 5] = [
    [-5.6688, 0.0, 0.0, 0.0, 0.0],
    [-2.430093356833875, -0.2063599157091915, 0.0, 0.0, 0.0],
    [-0.1073529058151375, -9.594562251023355, -20.47028614809616, 0.0, 0.0],
    [7.496443313967647, -10.24680431464352, -33.99990352819905, 11.7089089320616, 0.0],
    [8.083246795921522, -7.981132988064893, -31.52159432874371, 16.3193054312314, -6.058818238834054],
];

/// Error exponent: the embedded solution is order 3.
const ORDER_EXPONENT: f64 = -0.25;

struct Stepper<'a, S, F> {
    sys: &'a F,
    n: usize,
    stats: IntegratorStats,
    stages: [Vec<S>; 5],
    arg: Vec<S>,
    f: Vec<S>,
    rhs: Vec<S>,
}

impl<'a, S: Scalar, F: OdeSystem<S>> Stepper<'a, S, F> {
    fn new(sys: &'a F) -> Self {
        let n = sys.dim();
        let z = || vec![S::zero(); n];
        Self {
            sys,
            n,
            stats: IntegratorStats::default(),
            stages: [z(), z(), z(), z(), z()],
            arg: z(),
            f: z(),
            rhs: z(),
        }
    }

    fn rhs(&mut self, y: &[S]) -> Vec<S> {
        let mut dy = vec![S::zero(); self.n];
        self.sys.rhs(y, &mut dy);
        self.stats.rhs_evals += 1;
        dy
    }

    /// One trial step. Returns the new state and the error vector, or `None`
    /// if the stage matrix is singular.
    fn step(&mut self, y: &[S], f0: &[S], jac: &Matrix<S>, h: S) -> Option<(Vec<S>, Vec<S>)> {
        let n = self.n;
        let diag = S::one() / (h * S::lit(GAMMA));
        let mut w = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                w[(i, j)] = -jac[(i, j)];
            }
            w[(i, i)] = w[(i, i)] + diag;
        }
        let lu = Lu::factor(w)?;
        let inv_h = S::one() / h;
        lu.solve_into(f0, &mut self.stages[0]);
        // stages 2..=5 evaluate f at y + Σ a_ij u_j
        for i in 1..5 {
            for k in 0..n {
                self.arg[k] = (0..i).fold(y[k], |acc, j| acc + S::lit(A[i - 1][j]) * self.stages[j][k]);
            }
            self.sys.rhs(&self.arg, &mut self.f);
            for k in 0..n {
                self.rhs[k] = (0..i).fold(self.f[k], |acc, j| acc + S::lit(C[i - 1][j]) * self.stages[j][k] * inv_h);
            }
            lu.solve_into(&self.rhs, &mut self.stages[i]);
        }
        // stiffly accurate: stage 6 sits at the embedded solution
        for k in 0..n {
            self.arg[k] = (0..4).fold(y[k], |acc, j| acc + S::lit(A[3][j]) * self.stages[j][k]) + self.stages[4][k];
        }
        self.sys.rhs(&self.arg, &mut self.f);
        for k in 0..n {
            self.rhs[k] = (0..5).fold(self.f[k], |acc, j| acc + S::lit(C[4][j]) * self.stages[j][k] * inv_h);
        }
        self.stats.rhs_evals += 5;
        let mut err = vec![S::zero(); n];
        lu.solve_into(&self.rhs, &mut err);
        let y_new = self.arg.iter().zip(&err).map(|(&a, &e)| a + e).collect();
        Some((y_new, err))
    }
}

/// Integrates from `t0` through every entry of `checkpoints` (strictly
/// increasing, all `> t0`), landing on each exactly. Returns the state at
/// each checkpoint. `observer(t, y)` runs after every accepted step.
pub fn integrate<S, F, O>(
    sys: &F,
    t0: S,
    y0: &[S],
    checkpoints: &[S],
    control: &StepControl<S>,
    mut observer: O,
) -> Result<(Vec<Vec<S>>, IntegratorStats)>
where
    S: Scalar,
    F: OdeSystem<S>,
    O: FnMut(S, &[S]),
{
    let n = sys.dim();
    if y0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: y0.len() });
    }
    if !(control.rtol > S::zero() && control.atol >= S::zero()) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    let mut prev = t0;
    for &c in checkpoints {
        if !(c > prev) || !c.is_finite() {
            return Err(Error::InvalidArgument("checkpoints must increase strictly from the start time".into()));
        }
        prev = c;
    }
    let Some(&t_end) = checkpoints.last() else {
        return Ok((Vec::new(), IntegratorStats::default()));
    };

    let mut st = Stepper::new(sys);
    let weighted = |err: &[S], a: &[S], b: &[S]| -> S {
        (0..n).fold(S::zero(), |acc, i| {
            let scale = control.atol + control.rtol * a[i].abs().max(b[i].abs());
            acc.max(err[i].abs() / scale)
        })
    };

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut f0 = st.rhs(&y);
    let mut h = match control.initial_step {
        Some(h) => h,
        None => {
            let zeros = vec![S::zero(); n];
            let ny = weighted(&y, &y, &zeros);
            let nf = weighted(&f0, &y, &zeros);
            let guess = if ny < S::lit(1e-5) || nf < S::lit(1e-5) { S::lit(1e-6) } else { S::lit(0.01) * ny / nf };
            guess * control.rtol.powf(S::lit(0.25))
        }
    };
    h = h.min(t_end - t0);
    let mut jac = Matrix::zeros(n, n);
    let mut jac_fresh = false;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next_cp = 0;
    let exponent = S::lit(ORDER_EXPONENT);

    loop {
        if st.stats.accepted + st.stats.rejected >= control.max_steps {
            return Err(Error::IntegratorFailure(format!(
                "step budget of {} exhausted at t = {t:?}",
                control.max_steps
            )));
        }
        if h <= S::lit(16.0) * S::epsilon() * t.abs() || h < S::min_positive_value() {
            return Err(Error::IntegratorFailure(format!("step size underflow at t = {t:?}")));
        }
        if !jac_fresh {
            sys.jacobian(&y, &mut jac);
            st.stats.jacobian_evals += 1;
            jac_fresh = true;
        }
        let target = checkpoints[next_cp];
        let hits = t + h >= target;
        let h_plan = h;
        let h_try = if hits { target - t } else { h };
        let Some((y_new, err)) = st.step(&y, &f0, &jac, h_try) else {
            st.stats.rejected += 1;
            h = h_try * S::lit(0.5);
            continue;
        };
        let e = weighted(&err, &y, &y_new);
        let finite = y_new.iter().all(|v| v.is_finite());
        if finite && e <= S::one() {
            st.stats.accepted += 1;
            st.stats.max_error_estimate = st.stats.max_error_estimate.max(e.as_f64());
            t = if hits { target } else { t + h_try };
            y = y_new;
            f0 = st.rhs(&y);
            jac_fresh = false;
            observer(t, &y);
            if hits {
                out.push(y.clone());
                next_cp += 1;
                if next_cp == checkpoints.len() {
                    return Ok((out, st.stats));
                }
            }
            let factor = if e == S::zero() { S::lit(6.0) } else { S::lit(0.9) * e.powf(exponent) };
            h = h_try * factor.max(S::lit(0.2)).min(S::lit(6.0));
            // a landing step shortened to hit a checkpoint says nothing about the next one
            if hits && h_try < h_plan {
                h = h.max(h_plan);
            }
        } else {
            st.stats.rejected += 1;
            let factor = if finite { (S::lit(0.9) * e.powf(exponent)).max(S::lit(0.2)) } else { S::lit(0.2) };
            h = h_try * factor.min(S::lit(0.9));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay(f64);

    impl OdeSystem<f64> for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, y: &[f64], dy: &mut [f64]) {
            dy[0] = -self.0 * y[0];
        }
        fn jacobian(&self, _: &[f64], jac: &mut Matrix<f64>) {
            jac[(0, 0)] = -self.0;
        }
    }

    /// Robertson kinetics; y1 + y2 + y3 is invariant.
    struct Robertson;

    impl OdeSystem<f64> for Robertson {
        fn dim(&self) -> usize {
            3
        }
        fn rhs(&self, y: &[f64], dy: &mut [f64]) {
            dy[0] = -0.04 * y[0] + 1e4 * y[1] * y[2];
            dy[2] = 3e7 * y[1] * y[1];
            dy[1] = -dy[0] - dy[2];
        }
        fn jacobian(&self, y: &[f64], j: &mut Matrix<f64>) {
            j[(0, 0)] = -0.04;
            j[(0, 1)] = 1e4 * y[2];
            j[(0, 2)] = 1e4 * y[1];
            j[(2, 0)] = 0.0;
            j[(2, 1)] = 6e7 * y[1];
            j[(2, 2)] = 0.0;
            for c in 0..3 {
                j[(1, c)] = -j[(0, c)] - j[(2, c)];
            }
        }
    }

    #[test]
    fn exponential_decay_at_checkpoints() {
        let cps: Vec<f64> = (1..=10).map(|i| i as f64 * 0.1).collect();
        let (ys, stats) = integrate(&Decay(3.0), 0.0, &[1.0], &cps, &StepControl::default(), |_, _| {}).unwrap();
        for (t, y) in cps.iter().zip(&ys) {
            assert!((y[0] - (-3.0 * t).exp()).abs() < 1e-8, "{t}: {}", y[0]);
        }
        assert!(stats.accepted > 10 && stats.max_error_estimate <= 1.0);
    }

    #[test]
    fn stiff_decay_with_large_steps() {
        let (ys, stats) = integrate(&Decay(1e6), 0.0, &[1.0], &[1.0], &StepControl::default(), |_, _| {}).unwrap();
        assert!(ys[0][0].abs() < 1e-10);
        assert!(stats.accepted < 2000, "{stats:?}");
    }

    #[test]
    fn robertson_conserves_mass() {
        let mut worst: f64 = 0.0;
        let (ys, _) = integrate(&Robertson, 0.0, &[1.0, 0.0, 0.0], &[40.0], &StepControl::default(), |_, y| {
            worst = worst.max((y.iter().sum::<f64>() - 1.0).abs());
        })
        .unwrap();
        assert!(worst < 1e-13, "{worst}");
        // reference values at t = 40 (Hairer & Wanner)
        assert!((ys[0][0] - 0.7158270687193941).abs() < 1e-5);
        assert!((ys[0][2] - 0.2841637457603583).abs() < 1e-5);
    }

    struct Pendulum;

    impl OdeSystem<f64> for Pendulum {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -y[0].sin();
        }
        fn jacobian(&self, y: &[f64], j: &mut Matrix<f64>) {
            j[(0, 0)] = 0.0;
            j[(0, 1)] = 1.0;
            j[(1, 0)] = -y[0].cos();
            j[(1, 1)] = 0.0;
        }
    }

    fn fixed_steps(steps: usize) -> (Vec<f64>, f64) {
        let mut st = Stepper::new(&Pendulum);
        let h = 2.0 / steps as f64;
        let mut y = vec![1.0, 0.0];
        let mut jac = Matrix::zeros(2, 2);
        let mut first_err = 0.0;
        for k in 0..steps {
            let f0 = st.rhs(&y);
            Pendulum.jacobian(&y, &mut jac);
            let (y_new, err) = st.step(&y, &f0, &jac, h).unwrap();
            if k == 0 {
                first_err = err.iter().fold(0.0f64, |a, e| a.max(e.abs()));
            }
            y = y_new;
        }
        (y, first_err)
    }

    #[test]
    fn convergence_orders() {
        let (reference, _) = fixed_steps(4096);
        let global = |n| {
            let (y, e) = fixed_steps(n);
            ((y[0] - reference[0]).abs().max((y[1] - reference[1]).abs()), e)
        };
        let (g1, e1) = global(16);
        let (g2, e2) = global(32);
        let (g3, e3) = global(64);
        // global error of the main solution ~ h^4
        let p12 = (g1 / g2).log2();
        let p23 = (g2 / g3).log2();
        assert!(p12 > 3.6 && p23 > 3.6, "{p12} {p23}");
        // local error of the embedded solution ~ h^4
        let q12 = (e1 / e2).log2();
        let q23 = (e2 / e3).log2();
        assert!(q12 > 3.5 && q23 > 3.5, "{q12} {q23}");
    }

    #[test]
    fn bad_checkpoints_rejected() {
        let c = StepControl::default();
        assert!(integrate(&Decay(1.0), 0.0, &[1.0], &[0.5, 0.5], &c, |_, _| {}).is_err());
        assert!(integrate(&Decay(1.0), 1.0, &[1.0], &[0.5], &c, |_, _| {}).is_err());
        assert!(integrate(&Decay(1.0), 0.0, &[1.0, 2.0], &[0.5], &c, |_, _| {}).is_err());
    }

    #[test]
    fn step_budget() {
        let c = StepControl { max_steps: 3, ..StepControl::default() };
        assert!(matches!(
            integrate(&Decay(1.0), 0.0, &[1.0], &[10.0], &c, |_, _| {}),
            Err(Error::IntegratorFailure(_))
        ));
    }
}

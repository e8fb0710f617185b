//! Isothermal batch reactor with consecutive reactions `2A → B → C`.
//!
//! In scaled time `τ ∈ [0, 1]` (batch time `t` minutes):
//!
//! ```text
//! dC_A/dτ = -2 t k1 C_A²
//! dC_B/dτ =  t (k1 C_A² - k2 C_B)
//! dC_C/dτ =  t k2 C_B
//! ```
//!
//! with `C_A(0) = C_A0`, `C_B(0) = C_C(0) = 0` and Arrhenius rates
//! `k_j = k_j⁰ exp(-E_j / (R T))`. `C_A + 2 (C_B + C_C)` is conserved.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::ode::{integrate, IntegratorStats, OdeSystem, StepControl};
use crate::Scalar;

pub const PURITY_THRESHOLD: f64 = 0.8;
pub const PROFIT_THRESHOLD: f64 = 128.0;

/// Relative tolerance of the post-run conservation check.
pub const CONSERVATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticParams<S> {
    /// Activation energy of `2A → B`, J/mol.
    pub e1: S,
    /// Activation energy of `B → C`, J/mol.
    pub e2: S,
    pub k1_ref: S,
    pub k2_ref: S,
    /// Gas constant, J/(mol K).
    pub r_gas: S,
    pub ca0: S,
    /// Reactor volume, m³.
    pub volume: S,
}

impl<S: Scalar> Default for KineticParams<S> {
    fn default() -> Self {
        Self {
            e1: S::lit(2500.2),
            e2: S::lit(5000.1),
            k1_ref: S::lit(0.0666),
            k2_ref: S::lit(10333.5),
            r_gas: S::lit(8.314),
            ca0: S::lit(2000.0),
            volume: S::one(),
        }
    }
}

impl<S: Scalar> KineticParams<S> {
    /// Zero activation energies and pre-exponential factors are accepted so
    /// that degenerate variants (no reaction, temperature-independent rates)
    /// can be expressed.
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("e1", self.e1, true),
            ("e2", self.e2, true),
            ("k1_ref", self.k1_ref, true),
            ("k2_ref", self.k2_ref, true),
            ("r_gas", self.r_gas, false),
            ("ca0", self.ca0, false),
            ("volume", self.volume, false),
        ];
        for (name, v, zero_ok) in checks {
            let ok = v.is_finite() && (v > S::zero() || (zero_ok && v == S::zero()));
            if !ok {
                return Err(Error::InvalidSpec(format!("kinetic parameter {name} = {v:?} out of range")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint<S> {
    /// Kelvin.
    pub temperature: S,
    /// Batch time, minutes.
    pub time: S,
}

impl<S: Scalar> OperatingPoint<S> {
    pub fn new(temperature: S, time: S) -> Self {
        Self { temperature, time }
    }

    pub fn as_vec(&self) -> Vec<S> {
        vec![self.temperature, self.time]
    }
}

/// Operating window, `T` then `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactorBox<S> {
    pub temperature: (S, S),
    pub time: (S, S),
}

impl<S: Scalar> Default for ReactorBox<S> {
    fn default() -> Self {
        Self { temperature: (S::lit(250.0), S::lit(300.0)), time: (S::lit(250.0), S::lit(300.0)) }
    }
}

impl<S: Scalar> ReactorBox<S> {
    pub fn bounds(&self) -> Vec<(S, S)> {
        vec![self.temperature, self.time]
    }

    pub fn contains(&self, u: &OperatingPoint<S>) -> bool {
        (self.temperature.0..=self.temperature.1).contains(&u.temperature)
            && (self.time.0..=self.time.1).contains(&u.time)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactorOutcome<S> {
    pub ca: S,
    pub cb: S,
    pub cc: S,
    pub purity: S,
    /// $/min.
    pub profit: S,
    pub stats: IntegratorStats,
}

pub fn rate_constants<S: Scalar>(temperature: S, params: &KineticParams<S>) -> Result<(S, S)> {
    if !(temperature > S::zero()) || !temperature.is_finite() {
        return Err(Error::NonpositiveTemperature(temperature.as_f64()));
    }
    let rt = params.r_gas * temperature;
    Ok((params.k1_ref * (-params.e1 / rt).exp(), params.k2_ref * (-params.e2 / rt).exp()))
}

/// Right-hand side in scaled time for fixed rates and batch time.
#[derive(Debug, Clone, Copy)]
pub struct ReactorOde<S> {
    pub k1: S,
    pub k2: S,
    pub batch_time: S,
}

impl<S: Scalar> OdeSystem<S> for ReactorOde<S> {
    fn dim(&self) -> usize {
        3
    }

    fn rhs(&self, y: &[S], dy: &mut [S]) {
        let t = self.batch_time;
        let formation = t * self.k1 * y[0] * y[0];
        let consumption = t * self.k2 * y[1];
        dy[0] = -S::lit(2.0) * formation;
        dy[1] = formation - consumption;
        dy[2] = consumption;
    }

    fn jacobian(&self, y: &[S], jac: &mut Matrix<S>) {
        let t = self.batch_time;
        let d_formation = S::lit(2.0) * t * self.k1 * y[0];
        let z = S::zero();
        let rows = [[-S::lit(2.0) * d_formation, z, z], [d_formation, -t * self.k2, z], [z, t * self.k2, z]];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                jac[(i, j)] = v;
            }
        }
    }
}

/// Integrator tolerances for [`simulate`].
pub fn default_control<S: Scalar>() -> StepControl<S> {
    StepControl { rtol: S::lit(1e-8), atol: S::lit(1e-10), ..StepControl::default() }
}

/// Integrates to each scaled time in `checkpoints` (increasing, in `(0, 1]`),
/// returning `[C_A, C_B, C_C]` there. `observer(τ, y)` runs after every
/// accepted step.
pub fn trajectory<S: Scalar>(
    u: &OperatingPoint<S>,
    params: &KineticParams<S>,
    control: &StepControl<S>,
    checkpoints: &[S],
    observer: impl FnMut(S, &[S]),
) -> Result<(Vec<Vec<S>>, IntegratorStats)> {
    params.validate()?;
    let (k1, k2) = rate_constants(u.temperature, params)?;
    if !(u.time > S::zero()) || !u.time.is_finite() {
        return Err(Error::InvalidArgument(format!("batch time must be positive, got {:?}", u.time)));
    }
    let ode = ReactorOde { k1, k2, batch_time: u.time };
    integrate(&ode, S::zero(), &[params.ca0, S::zero(), S::zero()], checkpoints, control, observer)
}

pub fn simulate<S: Scalar>(u: &OperatingPoint<S>, params: &KineticParams<S>) -> Result<ReactorOutcome<S>> {
    simulate_with(u, params, &default_control())
}

pub fn simulate_with<S: Scalar>(
    u: &OperatingPoint<S>,
    params: &KineticParams<S>,
    control: &StepControl<S>,
) -> Result<ReactorOutcome<S>> {
    let (states, stats) = trajectory(u, params, control, &[S::one()], |_, _| {})?;
    let (ca, cb, cc) = (states[0][0], states[0][1], states[0][2]);
    let total = ca + S::lit(2.0) * (cb + cc);
    let drift = ((total - params.ca0) / params.ca0).abs();
    if !(drift <= S::lit(CONSERVATION_TOL)) {
        return Err(Error::ToleranceNotMet(drift.as_f64()));
    }
    let purity = cb / (ca + cb + cc);
    let profit = (S::lit(100.0) * cb - S::lit(20.0) * ca) * params.volume / (u.time + S::lit(30.0));
    Ok(ReactorOutcome { ca, cb, cc, purity, profit, stats })
}

/// `(purity, profit)` at `u`.
pub fn cqa_vector<S: Scalar>(u: &OperatingPoint<S>, params: &KineticParams<S>) -> Result<(S, S)> {
    let o = simulate(u, params)?;
    Ok((o.purity, o.profit))
}

//! The reduced travelling-wave system
//!
//! ```text
//! φ' = ψ
//! ψ' = (-A + (β+c) φ + (γ/2) φ²) / α
//! ```
//!
//! obtained by integrating the profile equation once, with its conserved
//! Hamiltonian, stationary-point classification and a numerical homoclinic
//! orbit that serves as an independent oracle for the closed-form soliton.

mod dopri;

use thiserror::Error;

pub use dopri::{dopri5, OdeError, OdeOptions, OdeSolution, StepControl};

use crate::graph::EdgeParams;
use crate::soliton::SolitonProfile;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhaseError {
    #[error("invalid phase parameters: {0}")]
    InvalidParams(String),
    #[error("homoclinic shooting needs A = 0 and beta + c > 0 ({0})")]
    NoHomoclinic(String),
    #[error(transparent)]
    Integration(#[from] OdeError),
    #[error("orbit did not return to the saddle before t = {0}")]
    NoReturn(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub c: f64,
    /// Integration constant `A` of the once-integrated profile equation.
    pub a: f64,
}

impl PhaseParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, c: f64, a: f64) -> Result<Self, PhaseError> {
        if !(alpha > 0.0)
            || gamma == 0.0
            || ![alpha, beta, gamma, c, a].iter().all(|v| v.is_finite())
        {
            return Err(PhaseError::InvalidParams(format!(
                "alpha = {alpha}, gamma = {gamma} (need alpha > 0, gamma != 0, all finite)"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            c,
            a,
        })
    }

    pub fn from_edge(p: &EdgeParams, a: f64) -> Result<Self, PhaseError> {
        Self::new(p.alpha, p.beta, p.gamma, p.c, a)
    }

    fn margin(&self) -> f64 {
        self.beta + self.c
    }

    /// `(β+c)² + 2Aγ`.
    pub fn discriminant(&self) -> f64 {
        self.margin() * self.margin() + 2.0 * self.a * self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OrbitState {
    pub phi: f64,
    pub psi: f64,
}

impl OrbitState {
    pub fn new(phi: f64, psi: f64) -> Self {
        Self { phi, psi }
    }

    fn to_array(self) -> [f64; 2] {
        [self.phi, self.psi]
    }

    fn from_array(a: [f64; 2]) -> Self {
        Self::new(a[0], a[1])
    }

    fn dist(&self, o: &OrbitState) -> f64 {
        (self.phi - o.phi).hypot(self.psi - o.psi)
    }
}

/// Vector field `(φ', ψ')` at `s`.
pub fn rhs(p: &PhaseParams, s: &OrbitState) -> OrbitState {
    let force = -p.a + p.margin() * s.phi + 0.5 * p.gamma * s.phi * s.phi;
    OrbitState::new(s.psi, force / p.alpha)
}

/// `H = ψ²/2 - (1/α)(-Aφ + (β+c)/2 φ² + γ/6 φ³)`, constant along orbits.
pub fn hamiltonian(p: &PhaseParams, s: &OrbitState) -> f64 {
    let phi = s.phi;
    let potential = -p.a * phi + 0.5 * p.margin() * phi * phi + p.gamma / 6.0 * phi * phi * phi;
    0.5 * s.psi * s.psi - potential / p.alpha
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stationary {
    /// Negative discriminant: every orbit is unbounded.
    NoStationaryPoint,
    /// Zero discriminant.
    OneDegenerate(OrbitState),
    /// Positive discriminant: a center `p_-` and a saddle `p_+`, with the
    /// squared Jacobian eigenvalues at each.
    CenterAndSaddle {
        center: OrbitState,
        saddle: OrbitState,
        center_lambda_sq: f64,
        saddle_lambda_sq: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryClassification {
    pub discriminant: f64,
    pub verdict: Stationary,
}

/// Classifies the stationary points by the sign of `(β+c)² + 2Aγ`.
///
/// A discriminant within a few ulps of its terms' magnitude counts as zero.
pub fn classify(p: &PhaseParams) -> StationaryClassification {
    let m = p.margin();
    let disc = p.discriminant();
    let scale = m * m + (2.0 * p.a * p.gamma).abs();
    let verdict = if disc.abs() <= 64.0 * f64::EPSILON * scale {
        Stationary::OneDegenerate(OrbitState::new(-m / p.gamma, 0.0))
    } else if disc < 0.0 {
        Stationary::NoStationaryPoint
    } else {
        let root = disc.sqrt();
        Stationary::CenterAndSaddle {
            center: OrbitState::new((-m - root) / p.gamma, 0.0),
            saddle: OrbitState::new((-m + root) / p.gamma, 0.0),
            center_lambda_sq: -root / p.alpha,
            saddle_lambda_sq: root / p.alpha,
        }
    };
    StationaryClassification {
        discriminant: disc,
        verdict,
    }
}

/// Samples of one integration run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    solution: OdeSolution<2>,
    /// `H` at every sample.
    pub energy: Vec<f64>,
    /// `max |H(t) - H(t0)|` over samples.
    pub max_energy_drift: f64,
}

impl Trajectory {
    fn new(p: &PhaseParams, solution: OdeSolution<2>) -> Self {
        let energy: Vec<f64> = solution
            .y
            .iter()
            .map(|y| hamiltonian(p, &OrbitState::from_array(*y)))
            .collect();
        let h0 = energy[0];
        let max_energy_drift = energy.iter().map(|h| (h - h0).abs()).fold(0.0, f64::max);
        Self {
            solution,
            energy,
            max_energy_drift,
        }
    }

    pub fn len(&self) -> usize {
        self.solution.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solution.t.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.solution.t
    }

    pub fn state(&self, i: usize) -> OrbitState {
        OrbitState::from_array(self.solution.y[i])
    }

    pub fn states(&self) -> impl Iterator<Item = OrbitState> + '_ {
        self.solution.y.iter().map(|y| OrbitState::from_array(*y))
    }

    /// Dense output at `t`.
    pub fn at(&self, t: f64) -> OrbitState {
        OrbitState::from_array(self.solution.interpolate(t))
    }

    /// Rows `(t, φ, ψ, H)`.
    pub fn rows(&self) -> Vec<[f64; 4]> {
        (0..self.len())
            .map(|i| {
                let s = self.state(i);
                [self.solution.t[i], s.phi, s.psi, self.energy[i]]
            })
            .collect()
    }
}

/// Adaptive DOPRI5 run of the phase-plane system over `t_span`.
pub fn integrate_orbit(
    p: &PhaseParams,
    s0: OrbitState,
    t_span: (f64, f64),
    opts: &OdeOptions,
) -> Result<Trajectory, PhaseError> {
    let sol = dopri5(
        |_, y: &[f64; 2]| rhs(p, &OrbitState::from_array(*y)).to_array(),
        t_span.0,
        s0.to_array(),
        t_span.1,
        opts,
        |_, _| StepControl::Continue,
    )?;
    Ok(Trajectory::new(p, sol))
}

/// Numerical homoclinic loop together with its located extremum.
#[derive(Debug, Clone)]
pub struct HomoclinicOrbit {
    pub trajectory: Trajectory,
    /// Integration time at which `ψ = 0` on the far side of the loop.
    pub turning_time: f64,
    /// `φ` at the turning point, the numerical amplitude.
    pub turning_value: f64,
}

impl HomoclinicOrbit {
    /// Largest `|φ_num(t) - φ(y0 + t - turning_time)|` over samples and step
    /// midpoints, after translating the orbit so the extrema coincide.
    pub fn sup_gap(&self, profile: &SolitonProfile) -> f64 {
        let t = self.trajectory.times();
        let shift = profile.y0() - self.turning_time;
        let mut worst: f64 = 0.0;
        for i in 0..t.len() {
            let s = self.trajectory.state(i);
            worst = worst.max((s.phi - profile.eval(t[i] + shift, 0)).abs());
            if i + 1 < t.len() {
                let tm = 0.5 * (t[i] + t[i + 1]);
                let sm = self.trajectory.at(tm);
                worst = worst.max((sm.phi - profile.eval(tm + shift, 0)).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShootOptions {
    pub ode: OdeOptions,
    /// Give up after this much integration time; `None` picks a bound from
    /// the saddle's eigenvalue.
    pub max_time: Option<f64>,
}

/// Traces the homoclinic loop of the saddle `p_+ = (0, 0)`.
///
/// `direction = +1` leaves along the unstable eigenvector and integrates
/// forward; `direction = -1` leaves along the stable eigenvector and
/// integrates backward. In both cases the displacement points into the
/// half-plane `sign(φ) = -sign(γ)` that holds the loop. The run stops at the
/// closest approach to the saddle after the state has been farther than
/// `0.1 |p_- - p_+|` from it and come back inside that ball.
pub fn homoclinic_shoot(
    p: &PhaseParams,
    offset: f64,
    direction: i8,
    opts: &ShootOptions,
) -> Result<HomoclinicOrbit, PhaseError> {
    let m = p.margin();
    if p.a != 0.0 || !(m > 0.0) {
        return Err(PhaseError::NoHomoclinic(format!(
            "A = {}, beta + c = {m}",
            p.a
        )));
    }
    if !(offset > 0.0) {
        return Err(PhaseError::InvalidParams(format!(
            "offset must be positive, got {offset}"
        )));
    }
    let dir = if direction >= 0 { 1.0 } else { -1.0 };
    let lambda = (m / p.alpha).sqrt();
    let side = -p.gamma.signum();
    let norm = (1.0 + lambda * lambda).sqrt();
    let start = OrbitState::new(side * offset / norm, side * dir * lambda * offset / norm);

    let saddle = OrbitState::default();
    let center = OrbitState::new(-2.0 * m / p.gamma, 0.0);
    let outer = 0.1 * center.dist(&saddle);
    let max_time = opts
        .max_time
        .unwrap_or(4.0 * (1.0 / offset).ln().max(1.0) / lambda + 40.0 / lambda);

    let mut left = false;
    let mut returned = false;
    let mut last = f64::INFINITY;
    let sol = dopri5(
        |_, y: &[f64; 2]| rhs(p, &OrbitState::from_array(*y)).to_array(),
        0.0,
        start.to_array(),
        dir * max_time,
        &opts.ode,
        |_, y| {
            let d = OrbitState::from_array(*y).dist(&saddle);
            if d > outer {
                left = true;
            }
            let inside = left && d < outer;
            let moving_away = d > last;
            last = d;
            if inside && moving_away {
                returned = true;
                StepControl::Stop
            } else {
                StepControl::Continue
            }
        },
    )?;
    if !returned {
        return Err(PhaseError::NoReturn(dir * max_time));
    }
    let trajectory = Trajectory::new(p, sol);

    // extremum sample, then bisect ψ on the Hermite interpolant around it
    let n = trajectory.len();
    let pick = (0..n)
        .max_by(|&i, &j| {
            let a = side * trajectory.state(i).phi;
            let b = side * trajectory.state(j).phi;
            a.total_cmp(&b)
        })
        .expect("trajectory has samples");
    let t = trajectory.times();
    let (mut lo, mut hi) = (t[pick.saturating_sub(1)], t[(pick + 1).min(n - 1)]);
    let psi_at = |s: f64| trajectory.at(s).psi;
    let mut f_lo = psi_at(lo);
    if f_lo * psi_at(hi) <= 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let f_mid = psi_at(mid);
            if f_mid == 0.0 || (hi - lo).abs() < 1e-15 * (1.0 + mid.abs()) {
                lo = mid;
                hi = mid;
                break;
            }
            if (f_mid < 0.0) == (f_lo < 0.0) {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
    } else {
        lo = t[pick];
        hi = t[pick];
    }
    let turning_time = 0.5 * (lo + hi);
    let turning_value = trajectory.at(turning_time).phi;
    Ok(HomoclinicOrbit {
        trajectory,
        turning_time,
        turning_value,
    })
}

/// Rows `(φ, ψ, φ', ψ')` on an `n x n` grid over the given ranges.
pub fn vector_field(
    p: &PhaseParams,
    phi_range: (f64, f64),
    psi_range: (f64, f64),
    n: usize,
) -> Vec<[f64; 4]> {
    let lin = |(a, b): (f64, f64), i: usize| {
        if n <= 1 {
            a
        } else {
            a + (b - a) * i as f64 / (n - 1) as f64
        }
    };
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let s = OrbitState::new(lin(phi_range, i), lin(psi_range, j));
            let d = rhs(p, &s);
            rows.push([s.phi, s.psi, d.phi, d.psi]);
        }
    }
    rows
}

//! Generator-potential mechanics of the damped oscillator.
//!
//! The measurable displacement is `y = q'' - 2 lambda q' + omega^2 q` for a
//! potential `q`, with Lagrangian `L = y^2 / 2`. Its Euler-Lagrange equation
//! factors as `(D^2 + 2 lambda D + omega^2)(D^2 - 2 lambda D + omega^2) q = 0`,
//! i.e. `q'''' + (2 omega^2 - 4 lambda^2) q'' + omega^4 q = 0`, and is
//! equivalent to the damped oscillator equation for `y`.
//!
//! With two coordinates `(q1, q2) = (q, q')` and their conjugate momenta the
//! Hamiltonian is conserved; along physical (decaying) trajectories of a
//! dissipative system it must therefore vanish.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MediumParams;

/// `(q, q', q'', q''')` at one instant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PotentialState {
    pub q: f64,
    pub qd: f64,
    pub qdd: f64,
    pub qddd: f64,
}

impl PotentialState {
    pub fn new(q: f64, qd: f64, qdd: f64, qddd: f64) -> Self {
        PotentialState { q, qd, qdd, qddd }
    }

    pub fn is_finite(&self) -> bool {
        self.q.is_finite() && self.qd.is_finite() && self.qdd.is_finite() && self.qddd.is_finite()
    }

    fn axpy(&self, h: f64, d: &PotentialState) -> PotentialState {
        PotentialState {
            q: self.q + h * d.q,
            qd: self.qd + h * d.qd,
            qdd: self.qdd + h * d.qdd,
            qddd: self.qddd + h * d.qddd,
        }
    }
}

impl std::ops::Add for PotentialState {
    type Output = PotentialState;
    fn add(self, o: PotentialState) -> PotentialState {
        self.axpy(1.0, &o)
    }
}

/// Canonical pairs `(q1, p1)`, `(q2, p2)` of the second-order Lagrangian.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CanonicalState {
    pub q1: f64,
    pub q2: f64,
    pub p1: f64,
    pub p2: f64,
}

/// Energy-unit variables `Q_i = omega q_i`, `P_i = m omega p_i` together with
/// the Hamiltonian evaluated in those variables.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TransformedState {
    #[serde(rename = "Q1")]
    pub cap_q1: f64,
    #[serde(rename = "Q2")]
    pub cap_q2: f64,
    #[serde(rename = "P1")]
    pub cap_p1: f64,
    #[serde(rename = "P2")]
    pub cap_p2: f64,
    #[serde(rename = "Hprime")]
    pub h_prime: f64,
}

/// Uniformly sampled solution of the fourth-order potential equation.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialTrajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<PotentialState>,
}

impl PotentialTrajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn displacements(&self, p: &MediumParams) -> Vec<f64> {
        self.states.iter().map(|s| displacement_from_potential(s, p)).collect()
    }
}

/// `y = q'' - 2 lambda q' + omega^2 q`.
pub fn displacement_from_potential(s: &PotentialState, p: &MediumParams) -> f64 {
    s.qdd - 2.0 * p.lambda * s.qd + p.omega * p.omega * s.q
}

/// `dy/dt = q''' - 2 lambda q'' + omega^2 q'`.
pub fn velocity_from_potential(s: &PotentialState, p: &MediumParams) -> f64 {
    s.qddd - 2.0 * p.lambda * s.qdd + p.omega * p.omega * s.qd
}

pub fn lagrangian(s: &PotentialState, p: &MediumParams) -> f64 {
    let y = displacement_from_potential(s, p);
    0.5 * y * y
}

pub fn canonical_from_potential(s: &PotentialState, p: &MediumParams) -> CanonicalState {
    let (l, w2) = (p.lambda, p.omega * p.omega);
    CanonicalState {
        q1: s.q,
        q2: s.qd,
        p1: 4.0 * l * l * s.qd - s.qddd - w2 * s.qd - 2.0 * l * w2 * s.q,
        p2: s.qdd - 2.0 * l * s.qd + w2 * s.q,
    }
}

/// `H = p2^2/2 - omega^2 p2 q1 + p1 q2 + 2 lambda p2 q2`.
pub fn hamiltonian(c: &CanonicalState, p: &MediumParams) -> f64 {
    0.5 * c.p2 * c.p2 - p.omega * p.omega * c.p2 * c.q1 + c.p1 * c.q2 + 2.0 * p.lambda * c.p2 * c.q2
}

/// Hamiltonian in the energy-unit variables:
/// `H' = P2^2/(2m) - omega^2 P2 Q1 + P1 Q2 + 2 lambda P2 Q2`.
pub fn transformed_hamiltonian(t: &TransformedState, p: &MediumParams) -> f64 {
    t.cap_p2 * t.cap_p2 / (2.0 * p.m) - p.omega * p.omega * t.cap_p2 * t.cap_q1
        + t.cap_p1 * t.cap_q2
        + 2.0 * p.lambda * t.cap_p2 * t.cap_q2
}

pub fn transform_canonical(c: &CanonicalState, p: &MediumParams) -> TransformedState {
    let mw = p.m * p.omega;
    let mut t = TransformedState {
        cap_q1: p.omega * c.q1,
        cap_q2: p.omega * c.q2,
        cap_p1: mw * c.p1,
        cap_p2: mw * c.p2,
        h_prime: 0.0,
    };
    t.h_prime = transformed_hamiltonian(&t, p);
    t
}

fn potential_rhs(s: &PotentialState, p: &MediumParams) -> PotentialState {
    let w2 = p.omega * p.omega;
    let c2 = 2.0 * w2 - 4.0 * p.lambda * p.lambda;
    PotentialState {
        q: s.qd,
        qd: s.qdd,
        qdd: s.qddd,
        qddd: -c2 * s.qdd - w2 * w2 * s.q,
    }
}

fn rk4_step(s: &PotentialState, p: &MediumParams, h: f64) -> PotentialState {
    let k1 = potential_rhs(s, p);
    let k2 = potential_rhs(&s.axpy(0.5 * h, &k1), p);
    let k3 = potential_rhs(&s.axpy(0.5 * h, &k2), p);
    let k4 = potential_rhs(&s.axpy(h, &k3), p);
    PotentialState {
        q: s.q + h / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q),
        qd: s.qd + h / 6.0 * (k1.qd + 2.0 * k2.qd + 2.0 * k3.qd + k4.qd),
        qdd: s.qdd + h / 6.0 * (k1.qdd + 2.0 * k2.qdd + 2.0 * k3.qdd + k4.qdd),
        qddd: s.qddd + h / 6.0 * (k1.qddd + 2.0 * k2.qddd + 2.0 * k3.qddd + k4.qddd),
    }
}

/// Integrates the fourth-order potential equation with classical RK4 at a
/// fixed step. The number of steps is `round(horizon / dt)`.
pub fn integrate_potential(
    ic: &PotentialState,
    p: &MediumParams,
    dt: f64,
    horizon: f64,
) -> Result<PotentialTrajectory> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::param("dt", format!("must be > 0, got {dt}")));
    }
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(Error::param("T", format!("must be >= 0, got {horizon}")));
    }
    if !ic.is_finite() {
        return Err(Error::Unstable { t: 0.0 });
    }
    if p.omega * dt >= 0.1 {
        log::warn!("omega * dt = {:.3} exceeds the recommended 0.1", p.omega * dt);
    }
    let steps = (horizon / dt).round() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut s = *ic;
    times.push(0.0);
    states.push(s);
    for k in 1..=steps {
        s = rk4_step(&s, p, dt);
        let t = k as f64 * dt;
        if !s.is_finite() {
            return Err(Error::Unstable { t });
        }
        times.push(t);
        states.push(s);
    }
    Ok(PotentialTrajectory { dt, times, states })
}

/// Potential-space initial state reproducing `y(0) = y_init`,
/// `y'(0) = ydot_init` with the two modes annihilated by the map `q -> y`
/// set to zero.
///
/// For `lambda > 0` the potential lies in the decaying family
/// `q'' + 2 lambda q' + omega^2 q = 0`, where `y = -4 lambda q'`. For
/// `lambda = 0` the complementary modes are the secular ones `t sin(omega t)`,
/// `t cos(omega t)`.
pub fn admissible_initial_state(y_init: f64, ydot_init: f64, p: &MediumParams) -> PotentialState {
    let (l, w) = (p.lambda, p.omega);
    if l > 0.0 {
        let qd = -y_init / (4.0 * l);
        let qdd = -ydot_init / (4.0 * l);
        let q = -(qdd + 2.0 * l * qd) / (w * w);
        let qddd = -2.0 * l * qdd - w * w * qd;
        PotentialState { q, qd, qdd, qddd }
    } else {
        // q = alpha t sin(wt) + beta t cos(wt)
        let alpha = y_init / (2.0 * w);
        let beta = -ydot_init / (2.0 * w * w);
        PotentialState {
            q: 0.0,
            qd: beta,
            qdd: 2.0 * w * alpha,
            qddd: -3.0 * w * w * beta,
        }
    }
}

/// Adds seeded uniform noise of relative size `rel` (w.r.t. the largest
/// component) to every component. Used as a negative control: the result
/// excites the growing kernel modes and breaks `H = 0`.
pub fn perturbed_initial_state(ic: &PotentialState, rel: f64, seed: u64) -> PotentialState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = [ic.q, ic.qd, ic.qdd, ic.qddd]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE)
        * rel;
    let mut noise = || scale * rng.gen_range(-1.0..1.0);
    PotentialState {
        q: ic.q + noise(),
        qd: ic.qd + noise(),
        qdd: ic.qdd + noise(),
        qddd: ic.qddd + noise(),
    }
}

/// Extremes of the Hamiltonian along a trajectory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianCheck {
    pub max_h: f64,
    pub max_h_prime: f64,
    /// `max p2^2 / 2`, the natural scale of `H`.
    pub max_kinetic: f64,
}

impl HamiltonianCheck {
    /// `max|H| / max(p2^2/2)`; zero for the zero trajectory.
    pub fn relative(&self) -> f64 {
        if self.max_kinetic > 0.0 {
            self.max_h / self.max_kinetic
        } else {
            self.max_h
        }
    }

    /// Same ratio for `H'`, whose scale is `m omega^2` times that of `H`.
    pub fn relative_prime(&self, p: &MediumParams) -> f64 {
        let scale = p.m * p.omega * p.omega * self.max_kinetic;
        if scale > 0.0 {
            self.max_h_prime / scale
        } else {
            self.max_h_prime
        }
    }
}

pub fn verify_zero_hamiltonian(traj: &PotentialTrajectory, p: &MediumParams) -> HamiltonianCheck {
    traj.states.iter().fold(HamiltonianCheck::default(), |acc, s| {
        let c = canonical_from_potential(s, p);
        let h = hamiltonian(&c, p);
        let hp = transform_canonical(&c, p).h_prime;
        HamiltonianCheck {
            max_h: acc.max_h.max(h.abs()),
            max_h_prime: acc.max_h_prime.max(hp.abs()),
            max_kinetic: acc.max_kinetic.max(0.5 * c.p2 * c.p2),
        }
    })
}

//! Cart-pole swing-up.
//!
//! Frictionless cart with a uniform rod pivoting on it. `θ = 0` is upright and
//! `θ = π` hangs down. The network picks a force every control period (held
//! constant in between); fitness is the longest run of consecutive upright
//! simulation steps in the second half of the episode.

use std::f64::consts::PI;

use nalgebra::{Matrix1, Matrix4, Vector4};

use super::{Controller, Environment};
use crate::error::EnvError;
use crate::neat::{Genome, NetworkShape};
use crate::network::Phenotype;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CartPoleParams {
    /// kg
    pub cart_mass: f64,
    /// Full pole length, m.
    pub pole_length: f64,
    /// kg
    pub pole_mass: f64,
    /// N
    pub max_force: f64,
    /// s between force decisions.
    pub control_period: f64,
    /// s
    pub episode_length: f64,
    /// s per simulation (and scoring) step.
    pub sim_dt: f64,
    /// RK4 sub-steps per simulation step.
    pub rk4_substeps: usize,
    /// m/s²
    pub gravity: f64,
    /// The cart stops dead at `±track_half_length` m.
    pub track_half_length: f64,
    /// The pole counts as upright while `cos θ` exceeds this.
    pub upright_cos: f64,
    /// Divisors applied to (x, ẋ, θ, θ̇) before they reach the network.
    pub input_scale: [f64; 4],
}

impl Default for CartPoleParams {
    fn default() -> Self {
        CartPoleParams {
            cart_mass: 2.0,
            pole_length: 0.5,
            pole_mass: 0.5,
            max_force: 10.0,
            control_period: 0.25,
            episode_length: 5.0,
            sim_dt: 0.025,
            rk4_substeps: 4,
            gravity: 9.81,
            track_half_length: 2.4,
            upright_cos: 0.9,
            input_scale: [2.4, 5.0, PI, 10.0],
        }
    }
}

impl CartPoleParams {
    pub fn steps_per_control(&self) -> usize {
        (self.control_period / self.sim_dt).round() as usize
    }

    pub fn control_steps(&self) -> usize {
        (self.episode_length / self.control_period).round() as usize
    }

    pub fn total_steps(&self) -> usize {
        self.steps_per_control() * self.control_steps()
    }

    /// Steps in the scored second half.
    pub fn scored_steps(&self) -> usize {
        self.total_steps() / 2
    }

    /// Control period a whole number of sim steps and episode a whole number of periods.
    pub fn is_consistent(&self) -> bool {
        let k = self.steps_per_control() as f64;
        let c = self.control_steps() as f64;
        k >= 1.0
            && c >= 1.0
            && (k * self.sim_dt - self.control_period).abs() < 1e-9
            && (c * self.control_period - self.episode_length).abs() < 1e-9
            && self.total_steps() % 2 == 0
    }

    fn half_length(&self) -> f64 {
        self.pole_length / 2.0
    }

    /// Total energy with the potential zero at the hanging position.
    pub fn energy(&self, s: &CartPoleState) -> f64 {
        let (mc, mp, l) = (self.cart_mass, self.pole_mass, self.half_length());
        0.5 * (mc + mp) * s.x_dot * s.x_dot
            + mp * l * s.x_dot * s.theta_dot * s.theta.cos()
            + (2.0 / 3.0) * mp * l * l * s.theta_dot * s.theta_dot
            + mp * self.gravity * l * (1.0 + s.theta.cos())
    }

    /// Network inputs for a state: scaled position, velocity, wrapped angle, angular velocity.
    pub fn observe(&self, s: &CartPoleState) -> [f64; 4] {
        let sc = self.input_scale;
        [
            s.x / sc[0],
            s.x_dot / sc[1],
            wrap_angle(s.theta) / sc[2],
            s.theta_dot / sc[3],
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CartPoleState {
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
}

impl CartPoleState {
    pub const HANGING: CartPoleState = CartPoleState {
        x: 0.0,
        x_dot: 0.0,
        theta: PI,
        theta_dot: 0.0,
    };

    fn to_vec(self) -> Vector4<f64> {
        Vector4::new(self.x, self.x_dot, self.theta, self.theta_dot)
    }

    fn from_vec(v: Vector4<f64>) -> Self {
        CartPoleState {
            x: v[0],
            x_dot: v[1],
            theta: v[2],
            theta_dot: v[3],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.x_dot.is_finite() && self.theta.is_finite() && self.theta_dot.is_finite()
    }
}

/// Angle wrapped to `(-π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let a = theta.rem_euclid(2.0 * PI);
    if a > PI {
        a - 2.0 * PI
    } else {
        a
    }
}

fn derivative(p: &CartPoleParams, s: &Vector4<f64>, force: f64) -> Vector4<f64> {
    let (mc, mp, l, g) = (p.cart_mass, p.pole_mass, p.half_length(), p.gravity);
    let total = mc + mp;
    let (sin, cos) = s[2].sin_cos();
    let w = s[3];
    let tmp = (force + mp * l * w * w * sin) / total;
    let theta_acc = (g * sin - cos * tmp) / (l * (4.0 / 3.0 - mp * cos * cos / total));
    let x_acc = tmp - mp * l * theta_acc * cos / total;
    Vector4::new(s[1], x_acc, w, theta_acc)
}

fn rk4(p: &CartPoleParams, s: Vector4<f64>, force: f64, h: f64) -> Vector4<f64> {
    let k1 = derivative(p, &s, force);
    let k2 = derivative(p, &(s + k1 * (h / 2.0)), force);
    let k3 = derivative(p, &(s + k2 * (h / 2.0)), force);
    let k4 = derivative(p, &(s + k3 * h), force);
    s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Advances the state by `dt` seconds with constant `force`.
pub fn step_dynamics(
    s: CartPoleState,
    force: f64,
    dt: f64,
    p: &CartPoleParams,
) -> Result<CartPoleState, EnvError> {
    let n = p.rk4_substeps.max(1);
    let h = dt / n as f64;
    let mut v = s.to_vec();
    for _ in 0..n {
        v = rk4(p, v, force, h);
    }
    let mut out = CartPoleState::from_vec(v);
    if out.x.abs() > p.track_half_length {
        out.x = p.track_half_length.copysign(out.x);
        out.x_dot = 0.0;
    }
    if out.is_finite() {
        Ok(out)
    } else {
        Err(EnvError::Simulation)
    }
}

/// Longest run of consecutive `true` values.
pub fn longest_run(flags: &[bool]) -> usize {
    let mut best = 0;
    let mut cur = 0;
    for &f in flags {
        cur = if f { cur + 1 } else { 0 };
        best = best.max(cur);
    }
    best
}

/// Runs one episode from the hanging start and returns the fitness.
///
/// The controller sees `[x, ẋ, θ, θ̇]` (scaled, angle wrapped) and its single
/// output in `[-1, 1]` is the fraction of the maximum force. A simulation
/// failure ends the episode with fitness 0.
pub fn cartpole_swingup_evaluate<C: Controller + ?Sized>(
    controller: &mut C,
    p: &CartPoleParams,
) -> Result<f64, EnvError> {
    if controller.n_inputs() != 4 || controller.n_outputs() != 1 {
        return Err(EnvError::Arity(format!(
            "cart-pole needs 4 inputs and 1 output, controller has {} and {}",
            controller.n_inputs(),
            controller.n_outputs()
        )));
    }
    Ok(match upright_trace(controller, p)? {
        Some(trace) => longest_run(&trace[p.scored_steps()..]) as f64,
        None => 0.0,
    })
}

/// Upright flag after every simulation step, or `None` if the simulation blew up.
fn upright_trace<C: Controller + ?Sized>(
    controller: &mut C,
    p: &CartPoleParams,
) -> Result<Option<Vec<bool>>, EnvError> {
    let mut s = CartPoleState::HANGING;
    let mut trace = Vec::with_capacity(p.total_steps());
    let mut out = [0.0];
    for _ in 0..p.control_steps() {
        controller.act(&p.observe(&s), &mut out)?;
        let force = out[0].clamp(-1.0, 1.0) * p.max_force;
        for _ in 0..p.steps_per_control() {
            s = match step_dynamics(s, force, p.sim_dt, p) {
                Ok(s) => s,
                Err(EnvError::Simulation) => return Ok(None),
                Err(e) => return Err(e),
            };
            trace.push(s.theta.cos() > p.upright_cos);
        }
    }
    Ok(Some(trace))
}

/// The swing-up task as an [`Environment`] over genomes.
#[derive(Clone, Debug, Default)]
pub struct CartPoleSwingUp {
    pub params: CartPoleParams,
}

impl CartPoleSwingUp {
    pub fn new(params: CartPoleParams) -> Self {
        CartPoleSwingUp { params }
    }
}

impl Environment for CartPoleSwingUp {
    fn name(&self) -> String {
        "cartpole".into()
    }

    fn shape(&self) -> NetworkShape {
        NetworkShape::new(4, 1)
    }

    fn evaluate(&self, genome: &Genome) -> Result<f64, EnvError> {
        let mut net = Phenotype::build(genome)?;
        cartpole_swingup_evaluate(&mut net, &self.params)
    }

    fn solve_threshold(&self) -> Option<f64> {
        Some(self.params.scored_steps() as f64)
    }

    fn describe(&self) -> Vec<(String, String)> {
        let p = &self.params;
        vec![
            ("cartpole.cart_mass".into(), p.cart_mass.to_string()),
            ("cartpole.pole_length".into(), p.pole_length.to_string()),
            ("cartpole.pole_mass".into(), p.pole_mass.to_string()),
            ("cartpole.max_force".into(), p.max_force.to_string()),
            ("cartpole.control_period".into(), p.control_period.to_string()),
            ("cartpole.episode_length".into(), p.episode_length.to_string()),
            ("cartpole.sim_dt".into(), p.sim_dt.to_string()),
            ("cartpole.rk4_substeps".into(), p.rk4_substeps.to_string()),
            ("cartpole.track_half_length".into(), p.track_half_length.to_string()),
            ("cartpole.upright_cos".into(), p.upright_cos.to_string()),
            (
                "cartpole.input_scale".into(),
                format!("{:?}", p.input_scale),
            ),
        ]
    }
}

/// Model-based swing-up controller used to show the task is solvable.
///
/// Near upright it applies a discrete-time LQR gain computed for the held
/// control period. Elsewhere it searches all bang-bang force sequences over a
/// short horizon (each followed by the LQR catch) through the known dynamics
/// and applies the first force of the best one. It mirrors the episode
/// internally to know the time and the upright history.
pub struct SwingUpPlanner {
    params: CartPoleParams,
    gain: Vector4<f64>,
    horizon: usize,
    step: usize,
    history: Vec<bool>,
}

impl SwingUpPlanner {
    pub fn new(params: CartPoleParams, horizon: usize) -> Self {
        let gain = lqr_gain(&params);
        SwingUpPlanner {
            params,
            gain,
            horizon,
            step: 0,
            history: Vec::new(),
        }
    }

    /// Feedback gain `K` with `F = -K·[x, ẋ, θ, θ̇]`.
    pub fn gain(&self) -> Vector4<f64> {
        self.gain
    }

    fn in_basin(s: &CartPoleState) -> bool {
        wrap_angle(s.theta).cos() > 0.85 && s.theta_dot.abs() < 4.0
    }

    fn balance_force(&self, s: &CartPoleState) -> f64 {
        let v = Vector4::new(s.x, s.x_dot, wrap_angle(s.theta), s.theta_dot);
        (-self.gain.dot(&v)).clamp(-self.params.max_force, self.params.max_force)
    }

    /// Simulates from decision `k` to the end of the episode; `None` on blow-up.
    fn rollout(&self, mut s: CartPoleState, k: usize, plan: &[f64], trace: &mut Vec<bool>) -> Option<f64> {
        let p = &self.params;
        for (i, decision) in (k..p.control_steps()).enumerate() {
            let _ = decision;
            let force = match plan.get(i) {
                Some(&f) if !Self::in_basin(&s) => f,
                _ => self.balance_force(&s),
            };
            for _ in 0..p.steps_per_control() {
                s = step_dynamics(s, force, p.sim_dt, p).ok()?;
                trace.push(s.theta.cos() > p.upright_cos);
            }
        }
        Some(s.x.abs())
    }

    fn plan(&self, s: &CartPoleState) -> f64 {
        let p = &self.params;
        let k = self.step;
        let h = self.horizon.min(p.control_steps() - k).max(1);
        let mut best: Option<((usize, f64), f64)> = None;
        for bits in 0..(1u32 << h) {
            let plan: Vec<f64> = (0..h)
                .map(|i| if bits >> i & 1 == 1 { p.max_force } else { -p.max_force })
                .collect();
            let mut trace = self.history.clone();
            let Some(end_x) = self.rollout(*s, k, &plan, &mut trace) else {
                continue;
            };
            let score = (longest_run(&trace[p.scored_steps()..]), -end_x);
            if best.is_none_or(|(b, _)| score.0 > b.0 || (score.0 == b.0 && score.1 > b.1)) {
                best = Some((score, plan[0]));
            }
        }
        best.map_or(0.0, |(_, f)| f)
    }
}

impl Controller for SwingUpPlanner {
    fn n_inputs(&self) -> usize {
        4
    }

    fn n_outputs(&self) -> usize {
        1
    }

    fn act(&mut self, inputs: &[f64], outputs: &mut [f64]) -> Result<(), EnvError> {
        let p = self.params;
        let sc = p.input_scale;
        let s = CartPoleState {
            x: inputs[0] * sc[0],
            x_dot: inputs[1] * sc[1],
            theta: inputs[2] * sc[2],
            theta_dot: inputs[3] * sc[3],
        };
        let force = if Self::in_basin(&s) {
            self.balance_force(&s)
        } else {
            self.plan(&s)
        };
        // Mirror the environment to keep the upright history.
        let mut m = s;
        for _ in 0..p.steps_per_control() {
            m = step_dynamics(m, force, p.sim_dt, &p)?;
            self.history.push(m.theta.cos() > p.upright_cos);
        }
        self.step += 1;
        outputs[0] = force / p.max_force;
        Ok(())
    }
}

/// Discrete LQR gain for the upright equilibrium with the force held for one
/// control period. The discrete model is obtained by finite differences of
/// the simulator itself.
fn lqr_gain(p: &CartPoleParams) -> Vector4<f64> {
    let mut flat = *p;
    flat.track_half_length = f64::INFINITY;
    let advance = |s: Vector4<f64>, f: f64| -> Vector4<f64> {
        let mut st = CartPoleState::from_vec(s);
        for _ in 0..flat.steps_per_control() {
            st = step_dynamics(st, f, flat.sim_dt, &flat).expect("finite linearization");
        }
        st.to_vec()
    };
    let eps = 1e-6;
    let mut a = Matrix4::zeros();
    for i in 0..4 {
        let mut d = Vector4::zeros();
        d[i] = eps;
        a.set_column(i, &((advance(d, 0.0) - advance(-d, 0.0)) / (2.0 * eps)));
    }
    let b = (advance(Vector4::zeros(), eps) - advance(Vector4::zeros(), -eps)) / (2.0 * eps);

    let q = Matrix4::from_diagonal(&Vector4::new(1.0, 1.0, 10.0, 1.0));
    let r = Matrix1::new(0.05);
    let mut pm = q;
    for _ in 0..10_000 {
        let bt_p = b.transpose() * pm;
        let s = r + bt_p * b;
        let k = (bt_p * a) / s[0];
        let next = q + a.transpose() * pm * a - (a.transpose() * pm * b) * k;
        let done = (next - pm).abs().max() < 1e-12 * pm.abs().max().max(1.0);
        pm = next;
        if done {
            break;
        }
    }
    let bt_p = b.transpose() * pm;
    let k = (bt_p * a) / (r + bt_p * b)[0];
    k.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Constant(f64);

    impl Controller for Constant {
        fn n_inputs(&self) -> usize {
            4
        }
        fn n_outputs(&self) -> usize {
            1
        }
        fn act(&mut self, _: &[f64], out: &mut [f64]) -> Result<(), EnvError> {
            out[0] = self.0;
            Ok(())
        }
    }

    #[test]
    fn discretization_counts() {
        let p = CartPoleParams::default();
        assert!(p.is_consistent());
        assert_eq!(p.control_steps(), 20);
        assert_eq!(p.steps_per_control(), 10);
        assert_eq!(p.scored_steps(), 100);
    }

    #[test]
    fn hanging_is_a_fixed_point() {
        let p = CartPoleParams::default();
        let mut s = CartPoleState::HANGING;
        for _ in 0..200 {
            s = step_dynamics(s, 0.0, p.sim_dt, &p).unwrap();
        }
        assert!(s.x.abs() < 1e-12 && s.x_dot.abs() < 1e-12);
        assert!((s.theta - PI).abs() < 1e-12 && s.theta_dot.abs() < 1e-12);
    }

    #[test]
    fn upright_is_unstable() {
        let p = CartPoleParams::default();
        let mut s = CartPoleState {
            theta: 1e-6,
            ..CartPoleState::HANGING
        };
        s.theta = 1e-6;
        let mut prev = s.theta.abs();
        for _ in 0..40 {
            s = step_dynamics(s, 0.0, p.sim_dt, &p).unwrap();
            assert!(s.theta.abs() > prev);
            prev = s.theta.abs();
        }
        assert!(prev > 1e-4);
    }

    #[test]
    fn track_clamp_zeroes_velocity() {
        let p = CartPoleParams::default();
        let s = CartPoleState {
            x: 2.39,
            x_dot: 3.0,
            ..CartPoleState::HANGING
        };
        let s = step_dynamics(s, p.max_force, p.sim_dt, &p).unwrap();
        assert_eq!(s.x, 2.4);
        assert_eq!(s.x_dot, 0.0);
    }

    #[test]
    fn zero_controller_scores_zero() {
        let p = CartPoleParams::default();
        assert_eq!(cartpole_swingup_evaluate(&mut Constant(0.0), &p).unwrap(), 0.0);
        for f in [-1.0, -0.3, 0.5, 1.0] {
            let fit = cartpole_swingup_evaluate(&mut Constant(f), &p).unwrap();
            assert!((0.0..=100.0).contains(&fit));
        }
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle(0.1 + 4.0 * PI) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn arity_mismatch() {
        struct Two;
        impl Controller for Two {
            fn n_inputs(&self) -> usize {
                2
            }
            fn n_outputs(&self) -> usize {
                1
            }
            fn act(&mut self, _: &[f64], _: &mut [f64]) -> Result<(), EnvError> {
                Ok(())
            }
        }
        assert!(matches!(
            cartpole_swingup_evaluate(&mut Two, &CartPoleParams::default()),
            Err(EnvError::Arity(_))
        ));
    }

    #[test]
    fn unforced_energy_is_conserved() {
        let p = CartPoleParams {
            track_half_length: f64::INFINITY,
            ..CartPoleParams::default()
        };
        let mut s = CartPoleState {
            x: 0.0,
            x_dot: 0.7,
            theta: 2.0,
            theta_dot: -1.5,
        };
        let e0 = p.energy(&s);
        for _ in 0..1000 {
            s = step_dynamics(s, 0.0, p.sim_dt, &p).unwrap();
        }
        assert!(((p.energy(&s) - e0) / e0).abs() < 1e-6);
    }

    #[test]
    fn planner_swings_up_and_balances() {
        let p = CartPoleParams::default();
        let mut planner = SwingUpPlanner::new(p, 4);
        assert_eq!(cartpole_swingup_evaluate(&mut planner, &p).unwrap(), 100.0);
    }
}

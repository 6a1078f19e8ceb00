//! Swings the pole up with the model-based planner and prints the trajectory
//! score. A controller that keeps the pole up for the whole scored window
//! reaches fitness 100.

use std::time::Instant;

use saneat::env::{cartpole_swingup_evaluate, CartPoleParams, SwingUpPlanner};

fn main() {
    let params = CartPoleParams::default();
    println!(
        "dt {} s, {} sim steps per control, {} control steps, {} scored steps",
        params.sim_dt,
        params.steps_per_control(),
        params.control_steps(),
        params.scored_steps()
    );
    let mut planner = SwingUpPlanner::new(params, 4);
    println!("LQR gain {:?}", planner.gain().as_slice());
    let t = Instant::now();
    let fitness = cartpole_swingup_evaluate(&mut planner, &params).expect("planner has the right arity");
    println!("fitness {fitness} in {:.1?}", t.elapsed());
}

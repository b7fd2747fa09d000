// temporary diagnostic; removed before release
use dicke_sim::backend::{run_trajectory, Backend};
use dicke_sim::liouvillian::ModelParams;
use dicke_sim::observables::Quantity;
use dicke_sim::propagator::{EvolveOptions, PositivityCheck, TimeGrid};
use dicke_sim::timing::{evolve_until_extrema, HIERARCHY};
use std::time::Instant;

fn main() {
    // (1) converged C0/W gap for the N=2 default parameters
    for n_points in [2001usize, 8001, 20001] {
        let grid = TimeGrid::new(10.0, n_points).unwrap();
        let params = ModelParams::default();
        let (_, recs, _) = evolve_until_extrema(
            &params,
            &grid,
            Backend::Exact,
            &EvolveOptions::default(),
            &HIERARCHY,
        )
        .unwrap();
        let gap = recs[&Quantity::W].tau - recs[&Quantity::C0Re].tau;
        println!(
            "n_points={n_points}: tau_c0={:.6} tau_W={:.6} gap={:.6} (2 steps = {:.4})",
            recs[&Quantity::C0Re].tau,
            recs[&Quantity::W].tau,
            gap,
            2.0 * grid.spacing()
        );
    }

    // (2) min eigenvalue over the default run vs tolerances, N = 4, 6, 8
    for n in [4usize, 6, 8] {
        for (rtol, atol) in [(1e-8, 1e-10), (1e-9, 1e-12), (1e-10, 1e-12)] {
            let params = ModelParams {
                n_emitters: n,
                ..Default::default()
            };
            let grid = TimeGrid::default();
            let opts = EvolveOptions {
                rtol,
                atol,
                positivity: PositivityCheck::On,
                ..Default::default()
            };
            let t0 = Instant::now();
            match run_trajectory(&params, &grid, Backend::Exact, &opts) {
                Ok(r) => println!(
                    "N={n} rtol={rtol:.0e} atol={atol:.0e}: min_eig = {:+.3e}, drift {:.1e}, steps {}, {:?}",
                    r.diagnostics.min_eigenvalue.unwrap(),
                    r.diagnostics.max_trace_drift,
                    r.diagnostics.ode.steps_accepted,
                    t0.elapsed()
                ),
                Err(e) => println!("N={n} rtol={rtol:.0e} atol={atol:.0e}: FAILED {e}"),
            }
        }
    }
}

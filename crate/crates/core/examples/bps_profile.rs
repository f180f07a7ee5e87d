//! Integrate the first-order equations at phi0 = psi0 = 1 and compare with
//! the closed-form kink and with relaxation started from it.
//!
//! `cargo run --release --example bps_profile`

use soliton_lab::lattice::{continuum_residual, lattice_residual, total_energy};
use soliton_lab::model::Vacuum;
use soliton_lab::relaxer::relax;
use soliton_lab::seeds::{bps_integrate, bps_start, seed_d_exact_symmetric, symmetric_center_through, BPS_START_OFFSET};
use soliton_lab::{Grid, ModelParams, RelaxConfig};

fn main() -> soliton_lab::Result<()> {
    let p = ModelParams::new(1.0, 1.0)?;
    let g = Grid::with_spacing(-10.0, 10.0, 0.01)?;
    let start = bps_start(Vacuum::C, 1.0, BPS_START_OFFSET);
    let s = bps_integrate(g, 1.0, start)?;
    let x0 = symmetric_center_through(g.x_max, start.0, 1.0);
    let exact = seed_d_exact_symmetric(g, "D_AC".parse()?, x0, &p)?;
    println!("kink centre            {x0:.6}");
    println!("max |bps - exact|      {:.2e}", s.max_abs_diff(&exact));
    println!("field residual (5-pt)  {:.2e}", continuum_residual(&s, &p));
    println!("field residual (3-pt)  {:.2e}", lattice_residual(&s, &p));
    println!("energy                 {:.9} (bound {:.9})", total_energy(&s, &p), std::f64::consts::SQRT_2 / 2.0);
    let out = relax(&s, &RelaxConfig::default(), &p)?;
    println!("relaxation lowers E by {:.2e} in {} sweeps", out.energy_decrease(), out.sweeps);
    Ok(())
}

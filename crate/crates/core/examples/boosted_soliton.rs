//! Boost a relaxed soliton, evolve it and measure its speed with the tracker.
//!
//! `cargo run --release --example boosted_soliton -- D_AC 0.3`

use soliton_lab::evolver::evolve;
use soliton_lab::experiments::{fit_velocity, relax_sector, track_history};
use soliton_lab::lattice::{total_energy, total_momentum};
use soliton_lab::seeds::boost;
use soliton_lab::{EvolveConfig, Grid, ModelParams, RelaxConfig, SectorLabel};

fn main() -> soliton_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let sector: SectorLabel = args.next().unwrap_or_else(|| "D_AC".into()).parse()?;
    let v: f64 = args.next().map(|s| s.parse().expect("velocity")).unwrap_or(0.3);
    let p = ModelParams::default();
    let g = Grid::default();
    let rest = relax_sector(sector, -5.0, g, &RelaxConfig::default(), &p)?;
    let moving = boost(&rest.state, v)?;
    let gamma = 1.0 / (1.0 - v * v).sqrt();
    println!("rest mass {:.5}, boosted energy {:.5} (gamma M = {:.5})", rest.final_energy, total_energy(&moving, &p), gamma * rest.final_energy);
    println!("momentum {:.5} (gamma M v = {:.5})", total_momentum(&moving), gamma * rest.final_energy * v);
    let run = evolve(&moving, &EvolveConfig { t_end: 20.0, ..EvolveConfig::for_grid(&g) }, &p)?;
    let track = track_history(&run, sector, 5.0);
    for (t, x) in track.iter().step_by(5) {
        println!("t = {t:>5.1}  x = {x:+.4}");
    }
    if let Some(u) = fit_velocity(&track) {
        println!("measured speed {u:.4} (boost {v}, error {:+.2}%)", 100.0 * (u - v) / v);
    }
    Ok(())
}

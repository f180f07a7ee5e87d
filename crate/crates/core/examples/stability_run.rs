//! Evolve a relaxed soliton to t = 50 and write the snapshot series.
//!
//! `cargo run --release --example stability_run -- H_BC out/stability`

use std::path::PathBuf;

use soliton_lab::evolver::{evolve, write_run};
use soliton_lab::experiments::relax_sector;
use soliton_lab::{EvolveConfig, Grid, ModelParams, RelaxConfig, SectorLabel};

fn main() -> soliton_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let sector: SectorLabel = args.next().unwrap_or_else(|| "D_AB".into()).parse()?;
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "out/stability".into()));
    let p = ModelParams::default();
    let g = Grid::default();
    let rest = relax_sector(sector, 0.0, g, &RelaxConfig::default(), &p)?;
    let run = evolve(&rest.state, &EvolveConfig::for_grid(&g), &p)?;
    for s in run.snapshots.iter().step_by(10) {
        let pos: Vec<String> = s.solitons.iter().map(|k| format!("{} @ {:+.4}", k.sector, k.position)).collect();
        println!("t = {:>5.1}  E = {:.8}  {}", s.t, s.total_energy, pos.join(", "));
    }
    println!("max relative energy drift {:.2e}", run.max_energy_drift());
    println!("index written to {}", write_run(&dir, &run)?.display());
    Ok(())
}

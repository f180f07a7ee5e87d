//! Relax the analytic seed of one sector and print its mass and charges.
//!
//! `cargo run --release --example relax_sector -- H_BC`

use soliton_lab::charges::charges;
use soliton_lab::experiments::relax_sector;
use soliton_lab::{Grid, ModelParams, RelaxConfig, SectorLabel};

fn main() -> soliton_lab::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "D_AC".into());
    let sector: SectorLabel = name.parse()?;
    let p = ModelParams::default();
    let out = relax_sector(sector, 0.0, Grid::default(), &RelaxConfig::default(), &p)?;
    let (qh, qv) = charges(&out.state, &p)?;
    println!("sector     {sector}");
    println!("seed E     {:.6}", out.initial_energy);
    println!("relaxed E  {:.6}", out.final_energy);
    println!("charges    QH = {qh}, QV = {qv}");
    println!("sweeps     {} ({:?}, converged = {})", out.sweeps, out.stop, out.converged);
    Ok(())
}

//! Pump a relaxed V soliton over a range of amplitudes and report which
//! product runs which way.
//!
//! `cargo run --release --example chiral_decay -- V_EC`

use soliton_lab::experiments::{default_pump_factors, DecayLab};
use soliton_lab::{EvolveConfig, Grid, ModelParams, RelaxConfig, SectorLabel};

fn main() -> soliton_lab::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "V_DB".into());
    let parent: SectorLabel = name.parse()?;
    let p = ModelParams::default();
    let g = Grid::default();
    let lab = DecayLab::new(parent, g, &RelaxConfig::default(), &EvolveConfig::for_grid(&g), &p)?;
    println!("{parent}: relaxed mass {:.4}, products {} + {}", lab.relaxed.final_energy, lab.split.0, lab.split.1);
    println!("factor  decayed  left (x, v)             right (x, v)            radiation");
    for r in lab.scan(&default_pump_factors())? {
        let side = |i: usize| {
            r.products
                .get(i)
                .map(|d| format!("{} ({:+.2}, {:+.3})", d.sector, d.position, d.velocity))
                .unwrap_or_else(|| "-".into())
        };
        println!(
            "{:<6.1}  {:<7}  {:<22}  {:<22}  {:.3}",
            r.pumped_factor,
            r.decayed,
            side(0),
            side(1),
            r.energy_budget.radiation_remainder
        );
    }
    Ok(())
}

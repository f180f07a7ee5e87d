//! Relax every sector of the mass table, run the stability evolutions and
//! print the census as CSV, followed by the binding energy.
//!
//! `cargo run --release --example census`

use soliton_lab::experiments::{binding_energy, census, write_census};
use soliton_lab::{EvolveConfig, Grid, ModelParams, RelaxConfig};

fn main() -> soliton_lab::Result<()> {
    let p = ModelParams::default();
    let g = Grid::default();
    let rows = census(&p, g, &RelaxConfig::default(), &EvolveConfig::for_grid(&g))?;
    write_census(std::io::stdout().lock(), &rows)?;
    eprintln!("binding energy M(V) - 2 M(D) = {:.4}", binding_energy(&rows)?);
    for r in rows.iter().filter(|r| !r.intact()) {
        eprintln!("{} ended the stability run as {:?}", r.sector, r.final_solitons);
    }
    Ok(())
}

//! Relax a D soliton and print its field-space orbit next to the closed-form
//! orbit law residual.
//!
//! `cargo run --release --example orbit_law`

use soliton_lab::experiments::relax_sector;
use soliton_lab::seeds::orbit_residual;
use soliton_lab::{Grid, ModelParams, RelaxConfig, SectorLabel};

fn main() -> soliton_lab::Result<()> {
    let sector: SectorLabel = std::env::args().nth(1).unwrap_or_else(|| "D_AC".into()).parse()?;
    let p = ModelParams::default();
    let g = Grid::default();
    let s = relax_sector(sector, 0.0, g, &RelaxConfig::default(), &p)?.state;
    println!("x,phi,psi,orbit_residual");
    let mut worst: f64 = 0.0;
    for i in (0..g.n).step_by(10) {
        let r = orbit_residual(s.phi[i], s.psi[i], &p).unwrap_or(f64::NAN);
        if s.phi[i].abs().min(s.psi[i].abs()) > 0.05 {
            worst = worst.max(r.abs());
        }
        println!("{:.2},{:.6},{:.6},{:.3e}", g.x(i), s.phi[i], s.psi[i], r);
    }
    eprintln!("max residual away from the centre: {worst:.2e}");
    Ok(())
}

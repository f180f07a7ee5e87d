//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test --release --test acceptance`.

use std::collections::BTreeMap;
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use soliton_lab::charges::validate_array_names;
use soliton_lab::evolver::step;
use soliton_lab::experiments::{binding_energy, census, default_pump_factors, CensusRow, DecayLab, Stability};
use soliton_lab::lattice::{continuum_residual, total_energy};
use soliton_lab::model::Vacuum;
use soliton_lab::relaxer::relax;
use soliton_lab::seeds::{
    boost, bps_integrate, bps_start, orbit_residual, seed_d_exact_symmetric, symmetric_center_through,
    SeedSpec,
};
use soliton_lab::{EvolveConfig, Grid, ModelParams, RelaxConfig, SectorLabel};

const MASS_TOL: f64 = 0.01;
const DEGENERACY_TOL: f64 = 0.001;
const BINDING: f64 = 0.66;
const BINDING_TOL: f64 = 0.05;
const ENERGY_DRIFT_TOL: f64 = 0.001;
const CENTER_DRIFT_TOL: f64 = 0.1;
const MIN_TRIGGERING_FACTORS: usize = 5;
const ORBIT_TOL: f64 = 0.05;
const ORBIT_EXCLUSION: f64 = 0.05;
const BPS_TOL: f64 = 1e-5;
const BPS_RELAX_TOL: f64 = 1e-6;

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: u32, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!("[{}] {id}. {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn sector(s: &str) -> SectorLabel {
    s.parse().unwrap()
}

fn table_mass(l: SectorLabel) -> f64 {
    match l.family() {
        soliton_lab::Family::D => 2.858,
        soliton_lab::Family::H => 3.594,
        soliton_lab::Family::V => 6.383,
    }
}

fn table_charges(name: &str) -> (f64, f64) {
    match name {
        "D_AB" => (-0.5, 0.5),
        "D_AC" => (0.5, 0.5),
        "D_DA" => (0.5, 0.5),
        "D_EA" => (-0.5, 0.5),
        "H_BC" => (1.0, 0.0),
        "V_EC" => (0.0, 1.0),
        "H_DE" => (1.0, 0.0),
        "V_DB" => (0.0, 1.0),
        _ => unreachable!(),
    }
}

fn masses(rows: &[CensusRow]) -> String {
    rows.iter().map(|r| format!("{}={:.4}", r.sector, r.mass)).collect::<Vec<_>>().join(" ")
}

fn criterion_1(r: &mut Report, rows: &[CensusRow]) {
    let bad: Vec<String> = rows
        .iter()
        .filter(|row| (row.mass - table_mass(row.sector)).abs() > MASS_TOL * table_mass(row.sector))
        .map(|row| {
            let t = table_mass(row.sector);
            format!("{} {:.4} vs {t} ({:+.2}%)", row.sector, row.mass, 100.0 * (row.mass - t) / t)
        })
        .collect();
    let detail = if bad.is_empty() { masses(rows) } else { format!("outside 1%: {}", bad.join("; ")) };
    r.line(1, "mass table within 1%", bad.is_empty(), detail);
}

fn criterion_2(r: &mut Report, rows: &[CensusRow]) {
    let bad: Vec<String> = rows
        .iter()
        .filter(|row| (row.qh.value(), row.qv.value()) != table_charges(&row.sector.to_string()))
        .map(|row| format!("{} ({}, {})", row.sector, row.qh, row.qv))
        .collect();
    r.line(
        2,
        "snapped charges match the table",
        bad.is_empty(),
        if bad.is_empty() { "8/8 sectors".into() } else { format!("mismatch: {}", bad.join("; ")) },
    );
}

fn criterion_3(r: &mut Report, rows: &[CensusRow]) {
    let d: Vec<f64> = rows.iter().filter(|x| x.sector.family() == soliton_lab::Family::D).map(|x| x.mass).collect();
    let (lo, hi) = d.iter().fold((f64::MAX, f64::MIN), |(a, b), &m| (a.min(m), b.max(m)));
    let spread = (hi - lo) / lo;
    r.line(3, "D masses degenerate within 0.1%", d.len() == 4 && spread < DEGENERACY_TOL, format!("relative spread {spread:.2e}"));
}

fn criterion_4(r: &mut Report, rows: &[CensusRow]) {
    let b = binding_energy(rows).unwrap();
    r.line(
        4,
        "binding energy M(V) - 2 M(D) = 0.66 +- 0.05",
        (b - BINDING).abs() <= BINDING_TOL,
        format!("{b:.4}"),
    );
}

fn criterion_5(r: &mut Report, rows: &[CensusRow], spontaneous: &[(SectorLabel, bool)]) {
    let mut problems = Vec::new();
    for row in rows {
        if row.energy_drift >= ENERGY_DRIFT_TOL {
            problems.push(format!("{} energy drift {:.2e}", row.sector, row.energy_drift));
        }
        match row.center_drift {
            Some(d) if d < CENTER_DRIFT_TOL => {}
            Some(d) => problems.push(format!("{} centre drift {d:.3}", row.sector)),
            None => problems.push(format!(
                "{} did not stay a single soliton (ends as {:?})",
                row.sector,
                row.final_solitons.iter().map(|l| l.to_string()).collect::<Vec<_>>()
            )),
        }
    }
    for (parent, decayed) in spontaneous {
        if *decayed {
            problems.push(format!("{parent} decays at factor 1"));
        }
    }
    let worst = rows.iter().map(|x| x.energy_drift).fold(0.0, f64::max);
    let detail = if problems.is_empty() {
        format!("max energy drift {worst:.2e}")
    } else {
        problems.join("; ")
    };
    r.line(5, "stability runs to t=50, no spontaneous V decay", problems.is_empty(), detail);
}

fn criterion_6(r: &mut Report, lab: &DecayLab) {
    let reports = lab.scan(&default_pump_factors()).unwrap();
    let triggering: Vec<_> = reports.iter().filter(|x| x.decayed).collect();
    let chiral = |x: &&soliton_lab::experiments::DecayReport| {
        x.products.len() == 2
            && x.products[0].sector == sector("D_DA")
            && x.products[1].sector == sector("D_AB")
            && x.products[0].velocity < 0.0
            && x.products[1].velocity > 0.0
            && x.charge_sum_matches
    };
    let all_chiral = triggering.iter().all(chiral);
    let closure = triggering.iter().map(|x| x.energy_budget.closure_error).fold(0.0, f64::max);
    let remainder_ok = triggering.iter().all(|x| x.energy_budget.radiation_remainder >= 0.0);
    let factors: Vec<String> = triggering.iter().map(|x| format!("{:.1}", x.pumped_factor)).collect();
    r.line(
        6,
        "stimulated V_DB decay is chiral",
        triggering.len() >= MIN_TRIGGERING_FACTORS && all_chiral,
        format!(
            "decay at factors [{}], D_DA left / D_AB right in all: {all_chiral}, budget closure {closure:.1e}, remainder >= 0: {remainder_ok}",
            factors.join(", ")
        ),
    );
}

fn criterion_7(r: &mut Report, rows: &[CensusRow], p: &ModelParams) {
    let mut worst: f64 = 0.0;
    for row in rows.iter().filter(|x| x.sector.family() == soliton_lab::Family::D) {
        let s = row.relaxed.as_ref().unwrap();
        for i in 0..s.len() {
            if s.phi[i].abs().min(s.psi[i].abs()) > ORBIT_EXCLUSION {
                worst = worst.max(orbit_residual(s.phi[i], s.psi[i], p).unwrap().abs());
            }
        }
    }
    r.line(7, "orbit law on relaxed D profiles", worst < ORBIT_TOL, format!("max residual {worst:.2e}"));
}

fn criterion_8(r: &mut Report) {
    let p = ModelParams::new(1.0, 1.0).unwrap();
    let g = Grid::with_spacing(-10.0, 10.0, 0.01).unwrap();
    let start = bps_start(Vacuum::C, 1.0, 1e-4);
    let s = bps_integrate(g, 1.0, start).unwrap();
    let x0 = symmetric_center_through(g.x_max, start.0, 1.0);
    let exact = seed_d_exact_symmetric(g, sector("D_AC"), x0, &p).unwrap();
    let diff = s.max_abs_diff(&exact);
    let residual = continuum_residual(&s, &p);
    let out = relax(&s, &RelaxConfig::default(), &p).unwrap();
    let drop = out.energy_decrease();
    r.line(
        8,
        "first-order solution is exact",
        diff < BPS_TOL && residual < BPS_TOL && drop < BPS_RELAX_TOL,
        format!("profile error {diff:.2e}, field-equation residual {residual:.2e}, relaxation drop {drop:.2e}"),
    );
}

fn criterion_9(r: &mut Report) {
    let mut fails = Vec::new();
    let p = ModelParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    let h = 1e-6;
    let mut grad_ok = true;
    for _ in 0..1000 {
        let (a, b) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let (ga, gb) = p.grad_potential(a, b);
        let fa = (p.potential(a + h, b) - p.potential(a - h, b)) / (2.0 * h);
        let fb = (p.potential(a, b + h) - p.potential(a, b - h)) / (2.0 * h);
        let scale = ga.abs().max(gb.abs()).max(1.0);
        grad_ok &= (fa - ga).abs() <= 1e-6 * scale && (fb - gb).abs() <= 1e-6 * scale;
    }
    if !grad_ok {
        fails.push("gradient");
    }

    let g = Grid::default();
    let seed = SeedSpec::for_sector(sector("H_BC"), 0.0).build(g, &p).unwrap();
    let out = relax(&seed, &RelaxConfig { max_sweeps: 500, ..RelaxConfig::default() }, &p).unwrap();
    if !out.trace.windows(2).all(|w| w[1].total_energy <= w[0].total_energy) {
        fails.push("trace monotonicity");
    }

    let moving = boost(&out.state, 0.4).unwrap();
    let mut s = moving.clone();
    let dt = 0.4 * g.eps();
    for _ in 0..500 {
        s = step(&s, dt, &p).unwrap();
    }
    for _ in 0..500 {
        s = step(&s, -dt, &p).unwrap();
    }
    let rev = s.max_abs_diff(&moving);
    if rev >= 1e-12 {
        fails.push("time reversibility");
    }

    let e = total_energy(&seed, &p);
    let images = [seed.reflected(), seed.phi_flipped(), seed.psi_flipped()];
    if images.iter().any(|im| (total_energy(im, &p) - e).abs() > 1e-12 * e) {
        fails.push("parity/sign symmetry");
    }
    let q = ModelParams::new(1.0, 1.0).unwrap();
    let sym = SeedSpec::for_sector(sector("H_BC"), 0.0).build(g, &q).unwrap();
    let es = total_energy(&sym, &q);
    if (total_energy(&sym.fields_swapped(), &q) - es).abs() > 1e-12 * es {
        fails.push("duality");
    }

    let allowed = validate_array_names(&["D_DA", "D_AB", "H_BC", "V_CE", "H_ED"]);
    let forbidden = validate_array_names(&["D_DA", "D_BA", "H_BC", "V_EC", "H_EC"]);
    if !allowed || forbidden {
        fails.push("array validator");
    }

    r.line(
        9,
        "property suites",
        fails.is_empty(),
        if fails.is_empty() {
            format!("gradient 1000 pts, monotone trace, reversibility {rev:.1e}, symmetries, arrays")
        } else {
            format!("failed: {}", fails.join(", "))
        },
    );
}

fn main() -> ExitCode {
    let p = ModelParams::default();
    let g = Grid::default();
    let relax_cfg = RelaxConfig::default();
    let evolve_cfg = EvolveConfig::for_grid(&g);
    let mut report = Report { failures: 0 };

    let rows = census(&p, g, &relax_cfg, &evolve_cfg).unwrap();
    for row in &rows {
        let mode = row.decay_mode.map(|(a, b)| format!(" -> {a} + {b}")).unwrap_or_default();
        println!(
            "  census {}: mass {:.5} Q=({}, {}) {}{mode} converged={} sweeps={}",
            row.sector, row.mass, row.qh, row.qv, row.stability, row.converged, row.sweeps
        );
    }
    let stability_matches = rows
        .iter()
        .all(|row| (row.stability == Stability::Metastable) == (row.sector.family() == soliton_lab::Family::V));
    println!("  census stability column matches the table: {stability_matches}");

    let labs: BTreeMap<&str, DecayLab> = ["V_DB", "V_EC"]
        .into_iter()
        .map(|n| (n, DecayLab::new(sector(n), g, &relax_cfg, &evolve_cfg, &p).unwrap()))
        .collect();
    let spontaneous: Vec<(SectorLabel, bool)> = labs
        .iter()
        .map(|(n, lab)| (sector(n), lab.run(1.0).unwrap().0.decayed))
        .collect();

    criterion_1(&mut report, &rows);
    criterion_2(&mut report, &rows);
    criterion_3(&mut report, &rows);
    criterion_4(&mut report, &rows);
    criterion_5(&mut report, &rows, &spontaneous);
    criterion_6(&mut report, &labs["V_DB"]);
    criterion_7(&mut report, &rows, &p);
    criterion_8(&mut report);
    criterion_9(&mut report);

    println!("acceptance: {} of 9 criteria failed", report.failures);
    if report.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

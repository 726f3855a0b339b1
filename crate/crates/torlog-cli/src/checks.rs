//! The `validate` subcommand's check table: fast spot checks of the library
//! invariants on built-in fixtures. Each check is independent and reports a
//! one-line detail; a failure does not abort the remaining checks.

use torlog::entropy::{gamma_star, phi};
use torlog::fixtures;
use torlog::geometry::{
    support_function, wulff_shape, Direction, DiscreteSphericalMeasure, Polygon,
};
use torlog::measures::{partition_circle, sample_general_position, GeneralMeasure};
use torlog::oracle::{reference_torsion, saint_venant_check, ReferenceShape};
use torlog::solver::{residual, solve_discrete, SolveOptions, Target};
use torlog::torsion::{build_mesh, facet_torsion_measure, refine_and_extrapolate, solve_torsion};

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, body: impl FnOnce() -> Result<String, String>) -> Check {
    match body() {
        Ok(detail) => Check {
            name,
            pass: true,
            detail,
        },
        Err(detail) => Check {
            name,
            pass: false,
            detail,
        },
    }
}

fn lib<T>(r: torlog::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn forward(poly: &Polygon, level: u32) -> Result<(f64, f64, Vec<f64>, Vec<f64>), String> {
    let sol = lib(solve_torsion(build_mesh(poly, level)))?;
    let fm = lib(facet_torsion_measure(&sol, poly))?;
    Ok((sol.t, sol.energy, fm.mu_tor, fm.g_tor))
}

fn cone_measure(poly: &Polygon, level: u32) -> Result<DiscreteSphericalMeasure, String> {
    let (_, _, _, g) = forward(poly, level)?;
    lib(DiscreteSphericalMeasure::new(
        poly.directions().iter().cloned().zip(g).collect(),
    ))
}

pub fn run_all() -> Vec<Check> {
    vec![
        support_tightness(),
        redundant_facet(),
        scaling_exactness(),
        identity_gap_decreases(),
        energy_identity(),
        square_rigidity(),
        square_maximizer(),
        entropy_scaling_shift(),
        residual_calibration(),
        round_trip_solve(),
        partition_and_sampling(),
        subspace_mass(),
        reference_oracles(),
        saint_venant(),
    ]
}

fn support_tightness() -> Check {
    check("geometry-support-tightness", || {
        let mut worst = 0.0_f64;
        for poly in [fixtures::square(1.0), fixtures::pentagon()] {
            let tol = 1e-12 * poly.diameter();
            for (k, &d) in poly.directions().iter().enumerate() {
                let gap = (support_function(&poly, d) - poly.supports()[k]).abs();
                worst = worst.max(gap);
                if gap > tol {
                    return Err(format!("facet {k}: support gap {gap:.2e} > {tol:.2e}"));
                }
            }
        }
        Ok(format!("max |s(u_k) - h_k| = {worst:.2e}"))
    })
}

fn redundant_facet() -> Check {
    check("geometry-redundant-facet", || {
        let dirs = [
            Direction::new(1.0, 0.0).unwrap(),
            Direction::new(0.0, 1.0).unwrap(),
            Direction::new(-1.0, 0.0).unwrap(),
            Direction::new(0.0, -1.0).unwrap(),
            Direction::new(1.0, 1.0).unwrap(),
        ];
        let poly = lib(wulff_shape(&dirs, &[1.0, 1.0, 1.0, 1.0, 3.0]))?;
        if poly.facets()[4].present {
            return Err("support 3 along the diagonal still produced a facet".into());
        }
        let slack = 3.0 - support_function(&poly, dirs[4]);
        let expected = 3.0 - 2.0_f64.sqrt();
        if (slack - expected).abs() > 1e-12 {
            return Err(format!("slack {slack:.12} != {expected:.12}"));
        }
        Ok(format!("diagonal facet absent with slack {slack:.6}"))
    })
}

fn scaling_exactness() -> Check {
    check("torsion-scaling-exactness", || {
        let p = fixtures::pentagon();
        let (t0, _, mu0, _) = forward(&p, 2)?;
        let scaled = lib(p.transform(2.0, [0.0, 0.0]))?;
        let (t2, _, mu2, _) = forward(&scaled, 2)?;
        let shifted = lib(p.transform(1.0, [0.37, -1.25]))?;
        let (ts, _, _, _) = forward(&shifted, 2)?;
        let mut worst = (t2 - 16.0 * t0).abs() / (16.0 * t0);
        worst = worst.max((ts - t0).abs() / t0);
        for (a, b) in mu0.iter().zip(&mu2) {
            worst = worst.max((b - 8.0 * a).abs() / (8.0 * a));
        }
        if worst > 1e-12 {
            return Err(format!("worst relative defect {worst:.2e} > 1e-12"));
        }
        Ok(format!(
            "T(2P) = 16T, mu(2P) = 8mu, T(P+t) = T; worst defect {worst:.2e}"
        ))
    })
}

fn identity_gap_decreases() -> Check {
    check("torsion-identity-gap", || {
        let study = lib(refine_and_extrapolate(&fixtures::square(1.0), &[1, 2, 3]))?;
        let gaps: Vec<f64> = study.table.iter().map(|r| r.identity_gap).collect();
        if !(gaps[0] > gaps[1] && gaps[1] > gaps[2]) {
            return Err(format!("gaps not decreasing: {gaps:?}"));
        }
        if gaps[2] > 5e-2 {
            return Err(format!("level-3 gap {:.2e} > 5e-2", gaps[2]));
        }
        Ok(format!(
            "|4T - sum h mu|/4T = [{:.1e}, {:.1e}, {:.1e}] over levels 1..3",
            gaps[0], gaps[1], gaps[2]
        ))
    })
}

fn energy_identity() -> Check {
    check("torsion-energy-identity", || {
        let (t, energy, _, _) = forward(&fixtures::pentagon(), 3)?;
        let gap = (energy - t).abs() / t;
        if gap > 1e-8 {
            return Err(format!("|energy - 2 int u|/T = {gap:.2e} > 1e-8"));
        }
        Ok(format!("|energy - 2 int u|/T = {gap:.2e}"))
    })
}

fn square_rigidity() -> Check {
    check("torsion-square-rigidity", || {
        let series = 0.140577014955153715588468730738_f64;
        let study = lib(refine_and_extrapolate(&fixtures::unit_square(), &[1, 2, 3]))?;
        let rel = (study.t - series).abs() / series;
        if rel > 1e-2 {
            return Err(format!("T = {:.8} off the series value by {rel:.2e}", study.t));
        }
        Ok(format!("T = {:.8}, series {series:.8}, rel err {rel:.1e}", study.t))
    })
}

fn square_maximizer() -> Check {
    check("entropy-square-maximizer", || {
        let square = fixtures::square(1.0);
        let mu = lib(DiscreteSphericalMeasure::new(
            square
                .directions()
                .iter()
                .cloned()
                .zip([2.0, 1.0, 1.0, 1.0])
                .collect(),
        ))?;
        let star = lib(gamma_star(&square, &mu))?;
        let off = (star.gamma[0] + 1.0 / 3.0).hypot(star.gamma[1]);
        if off > 1e-8 {
            return Err(format!("|gamma - (-1/3, 0)| = {off:.2e} > 1e-8"));
        }
        Ok(format!(
            "|gamma - (-1/3, 0)| = {off:.1e} in {} Newton steps",
            star.iterations
        ))
    })
}

fn entropy_scaling_shift() -> Check {
    check("entropy-scaling-shift", || {
        let p = fixtures::pentagon();
        let mu = lib(DiscreteSphericalMeasure::new(
            p.directions().iter().map(|&d| (d, 1.0)).collect(),
        ))?;
        let base = lib(phi(&p, &mu, lib(gamma_star(&p, &mu))?.gamma))?.value;
        let scaled = lib(p.transform(2.0, [0.0, 0.0]))?;
        let top = lib(phi(&scaled, &mu, lib(gamma_star(&scaled, &mu))?.gamma))?.value;
        let defect = (top - (base + mu.total() * 2.0_f64.ln())).abs();
        if defect > 1e-9 {
            return Err(format!("value shift off by {defect:.2e} > 1e-9"));
        }
        Ok(format!("max value shifts by mass*log(m); defect {defect:.1e}"))
    })
}

fn residual_calibration() -> Check {
    check("solver-residual-calibration", || {
        let p = fixtures::pentagon();
        let mu = cone_measure(&p, 2)?;
        let self_res = lib(residual(&p, &mu, Target::Cone, 2))?;
        if self_res != 0.0 {
            return Err(format!("self residual {self_res:.2e} != 0"));
        }
        let doubled = lib(p.transform(2.0, [0.0, 0.0]))?;
        let r2 = lib(residual(&doubled, &mu, Target::Cone, 2))?;
        if (r2 - 15.0).abs() > 1e-9 {
            return Err(format!("residual of 2P = {r2} != 15"));
        }
        let mut atoms: Vec<(Direction, f64)> = mu
            .atoms()
            .iter()
            .map(|a| (a.direction, a.weight))
            .collect();
        atoms[1].1 *= 2.0;
        let tweaked = lib(DiscreteSphericalMeasure::new(atoms))?;
        let rh = lib(residual(&p, &tweaked, Target::Cone, 2))?;
        if (rh - 0.5).abs() > 1e-12 {
            return Err(format!("doubled-weight residual {rh} != 0.5"));
        }
        Ok("self 0, doubled body 15, doubled weight 0.5".into())
    })
}

fn round_trip_solve() -> Check {
    check("solver-round-trip", || {
        let p = fixtures::pentagon();
        let base = cone_measure(&p, 2)?;
        let tweaks = [1.15, 0.9, 1.08, 0.95, 1.0];
        let mu = lib(DiscreteSphericalMeasure::new(
            base.atoms()
                .iter()
                .zip(tweaks)
                .map(|(a, s)| (a.direction, a.weight * s))
                .collect(),
        ))?;
        let opts = SolveOptions {
            mesh_level: 2,
            extrapolate: false,
            max_outer: 200,
            residual_tol: 1e-2,
            ..SolveOptions::default()
        };
        let report = lib(solve_discrete(&mu, &opts))?;
        if !report.converged || report.residual > 1e-2 {
            return Err(format!(
                "residual {:.2e} after {} iterations",
                report.residual, report.iterations
            ));
        }
        Ok(format!(
            "residual {:.1e} <= 1e-2 in {} iterations",
            report.residual, report.iterations
        ))
    })
}

fn partition_and_sampling() -> Check {
    check("measures-partition-sampling", || {
        let arcs = partition_circle(8);
        let expected = (2.0 * std::f64::consts::PI * 8.0).ceil() as usize + 1;
        if arcs.len() != expected {
            return Err(format!("{} arcs, expected {expected}", arcs.len()));
        }
        if arcs[0].start != 0.0 || (arcs.last().unwrap().end - 2.0 * std::f64::consts::PI).abs() > 1e-12 {
            return Err("partition does not tile [0, 2pi)".into());
        }
        let dirs = lib(sample_general_position(&arcs, 0))?;
        let validity = torlog::geometry::validate_directions(&dirs);
        if !(validity.spans && validity.general_position) {
            return Err("sampled directions fail spanning or general position".into());
        }
        let again = lib(sample_general_position(&arcs, 0))?;
        if dirs
            .iter()
            .zip(&again)
            .any(|(a, b)| a.as_array() != b.as_array())
        {
            return Err("same seed produced different directions".into());
        }
        Ok(format!("{} arcs, seed-0 sample valid and repeatable", arcs.len()))
    })
}

fn subspace_mass() -> Check {
    check("measures-subspace-mass", || {
        let spread = lib(GeneralMeasure::new(
            None,
            (0..7)
                .map(|k| (2.0 * std::f64::consts::PI * k as f64 / 7.0, 1.0))
                .collect(),
        ))?;
        let ok = torlog::measures::subspace_mass_check(&spread);
        if !ok.pass {
            return Err(format!("7 spread atoms rejected, ratio {:.3}", ok.worst_ratio));
        }
        let concentrated = lib(GeneralMeasure::new(
            None,
            vec![(0.0, 0.6), (std::f64::consts::PI, 0.39), (1.5, 0.01)],
        ))?;
        let bad = torlog::measures::subspace_mass_check(&concentrated);
        if bad.pass || (bad.worst_ratio - 0.99).abs() > 1e-12 {
            return Err(format!(
                "antipodal pair with ratio 0.99 passed (ratio {:.3})",
                bad.worst_ratio
            ));
        }
        Ok(format!(
            "spread ratio {:.3} passes, antipodal ratio {:.3} fails",
            ok.worst_ratio, bad.worst_ratio
        ))
    })
}

fn reference_oracles() -> Check {
    check("oracle-references", || {
        for a in [0.5_f64, 1.0, 3.0] {
            let ell = lib(reference_torsion(ReferenceShape::Ellipse { a, b: a }))?;
            let disk = lib(reference_torsion(ReferenceShape::Disk { r: a }))?;
            if (ell - disk).abs() > 1e-15 * disk {
                return Err(format!("ellipse(a=b={a}) != disk: {ell} vs {disk}"));
            }
        }
        let r12 = lib(reference_torsion(ReferenceShape::Rectangle { a: 1.0, b: 2.0 }))?;
        let r21 = lib(reference_torsion(ReferenceShape::Rectangle { a: 2.0, b: 1.0 }))?;
        if (r12 - r21).abs() > 1e-12 * r12 {
            return Err(format!("rectangle series asymmetric: {r12} vs {r21}"));
        }
        let r11 = lib(reference_torsion(ReferenceShape::Rectangle { a: 1.0, b: 1.0 }))?;
        let r13 = lib(reference_torsion(ReferenceShape::Rectangle { a: 1.0, b: 3.0 }))?;
        if !(r11 < r12 && r12 < r13) {
            return Err(format!("rectangle values not monotone: {r11}, {r12}, {r13}"));
        }
        Ok("ellipse reduces to disk, rectangle series symmetric and monotone".into())
    })
}

fn saint_venant() -> Check {
    check("oracle-saint-venant", || {
        let pentagon = fixtures::pentagon();
        let (t, _, _, _) = forward(&pentagon, 2)?;
        let pent = saint_venant_check(&pentagon, t, 0.0);
        if !pent.holds {
            return Err(format!("pentagon violates the bound, slack {:.2e}", pent.slack));
        }
        let disk = fixtures::regular_ngon(64, 1.0);
        let (t, _, _, _) = forward(&disk, 2)?;
        let near = saint_venant_check(&disk, t, 0.0);
        if !near.holds {
            return Err(format!("64-gon violates the bound, slack {:.2e}", near.slack));
        }
        Ok(format!(
            "pentagon slack {:.2e}, 64-gon slack {:.2e}",
            pent.slack, near.slack
        ))
    })
}

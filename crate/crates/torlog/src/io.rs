//! Wire formats: JSON for measures, polygons, and solve reports; CSV for
//! convergence tables and objective traces; text specs for densities and
//! schedules.
//!
//! Measures: `{"atoms": [{"angle": r, "weight": w} | {"dir": [x, y],
//! "weight": w}, ...]}` with angles in radians. Polygons: `{"normals":
//! [[x, y], ...], "supports": [...], "vertices": [[x, y], ...]}`. Loaded
//! polygons are re-clipped from their support data and cross-checked against
//! the stored vertices, so anything that round-trips is geometrically valid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wulff_shape, Direction, DiscreteSphericalMeasure, Polygon};
use crate::measures::{Density, GeneralMeasure};
use crate::solver::{SolveReport, Target};
use crate::torsion::ConvergenceRow;

fn bad_json(e: serde_json::Error) -> Error {
    Error::InvalidInput(format!("malformed JSON: {e}"))
}

// ---------------------------------------------------------------------------
// measures
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureAtomDto {
    #[serde(skip_serializing_if = "Option::is_none")]
    angle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dir: Option<[f64; 2]>,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
struct MeasureDto {
    atoms: Vec<MeasureAtomDto>,
}

/// Parses the discrete measure format. Each atom carries `weight` and either
/// `angle` (radians) or `dir` (any nonzero vector, normalized on load).
pub fn measure_from_json(text: &str) -> Result<DiscreteSphericalMeasure> {
    let dto: MeasureDto = serde_json::from_str(text).map_err(bad_json)?;
    let mut atoms = Vec::with_capacity(dto.atoms.len());
    for (i, atom) in dto.atoms.iter().enumerate() {
        let direction = match (atom.angle, atom.dir) {
            (Some(a), None) => {
                if !a.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "atom {i}: angle must be finite"
                    )));
                }
                Direction::from_angle(a)
            }
            (None, Some(d)) => Direction::new(d[0], d[1])?,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "atom {i}: provide exactly one of \"angle\" or \"dir\""
                )))
            }
        };
        atoms.push((direction, atom.weight));
    }
    DiscreteSphericalMeasure::new(atoms)
}

pub fn measure_to_json(mu: &DiscreteSphericalMeasure) -> String {
    let dto = MeasureDto {
        atoms: mu
            .atoms()
            .iter()
            .map(|a| MeasureAtomDto {
                angle: None,
                dir: Some(a.direction.as_array()),
                weight: a.weight,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&dto).expect("measure serialization cannot fail")
}

// ---------------------------------------------------------------------------
// polygons
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PolygonDto {
    normals: Vec<[f64; 2]>,
    supports: Vec<f64>,
    vertices: Vec<[f64; 2]>,
}

/// Re-clips the polygon from its normals and supports and verifies the
/// stored vertices agree, so tampered or stale files are rejected.
pub fn polygon_from_json(text: &str) -> Result<Polygon> {
    let dto: PolygonDto = serde_json::from_str(text).map_err(bad_json)?;
    if dto.normals.len() != dto.supports.len() {
        return Err(Error::InvalidInput(format!(
            "{} normals but {} supports",
            dto.normals.len(),
            dto.supports.len()
        )));
    }
    let dirs = dto
        .normals
        .iter()
        .map(|d| Direction::new(d[0], d[1]))
        .collect::<Result<Vec<_>>>()?;
    let poly = wulff_shape(&dirs, &dto.supports)?;
    if dto.vertices.len() != poly.vertices().len() {
        return Err(Error::InvalidInput(format!(
            "stored vertices ({}) disagree with clipped hull ({})",
            dto.vertices.len(),
            poly.vertices().len()
        )));
    }
    let tol = 1e-9 * poly.diameter();
    // the stored chain may start at any rotation of the clipped one
    let n = poly.vertices().len();
    let offset = (0..n).find(|&off| {
        (0..n).all(|i| {
            let a = poly.vertices()[(i + off) % n];
            let b = dto.vertices[i];
            (a[0] - b[0]).hypot(a[1] - b[1]) <= tol
        })
    });
    if offset.is_none() {
        return Err(Error::InvalidInput(
            "stored vertices do not match the polygon defined by normals and supports".into(),
        ));
    }
    Ok(poly)
}

pub fn polygon_to_json(poly: &Polygon) -> String {
    serde_json::to_string_pretty(&polygon_dto(poly)).expect("polygon serialization cannot fail")
}

fn polygon_dto(poly: &Polygon) -> PolygonDto {
    PolygonDto {
        normals: poly.directions().iter().map(|d| d.as_array()).collect(),
        supports: poly.supports().to_vec(),
        vertices: poly.vertices().to_vec(),
    }
}

// ---------------------------------------------------------------------------
// solve reports
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ReportDto<'a> {
    polygon: PolygonDto,
    residual: f64,
    objective_trace: &'a [f64],
    iterations: usize,
    facet_alive: &'a [bool],
    t_final: f64,
    converged: bool,
    target: Target,
    warnings: &'a [String],
}

pub fn report_to_json(report: &SolveReport) -> String {
    let dto = ReportDto {
        polygon: polygon_dto(&report.polygon),
        residual: report.residual,
        objective_trace: &report.objective_trace,
        iterations: report.iterations,
        facet_alive: &report.facet_alive,
        t_final: report.t_final,
        converged: report.converged,
        target: report.target,
        warnings: &report.warnings,
    };
    serde_json::to_string_pretty(&dto).expect("report serialization cannot fail")
}

// ---------------------------------------------------------------------------
// general measures
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DensityDto {
    Spec(String),
    Structured(StructuredDensity),
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum StructuredDensity {
    Constant(f64),
    Cosine([f64; 2]),
    Table(Vec<[f64; 2]>),
}

#[derive(Serialize, Deserialize)]
struct GeneralMeasureDto {
    #[serde(skip_serializing_if = "Option::is_none")]
    density: Option<DensityDto>,
    #[serde(default)]
    atoms: Vec<MeasureAtomDto>,
}

/// A density description that may still reference an external file.
#[derive(Clone, Debug, PartialEq)]
pub enum DensitySpec {
    Constant(f64),
    Cosine { base: f64, amplitude: f64 },
    Table(Vec<(f64, f64)>),
    /// Atom list to merge in from a measure JSON file.
    AtomsFile(String),
    /// Table knots from a JSON file of `[angle, value]` pairs.
    TableFile(String),
}

/// Parses the textual density spec grammar:
/// `constant[:c]`, `cosine:a,b`, `atoms:path.json`, `table:path.json`.
/// Pure string processing; file references are resolved by the caller.
pub fn parse_density_spec(text: &str) -> Result<DensitySpec> {
    let text = text.trim();
    let (name, arg) = match text.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (text, None),
    };
    match (name, arg) {
        ("constant", None) => Ok(DensitySpec::Constant(1.0)),
        ("constant", Some(a)) => {
            let c: f64 = a
                .parse()
                .map_err(|_| Error::InvalidInput(format!("constant density: bad number {a:?}")))?;
            Ok(DensitySpec::Constant(c))
        }
        ("cosine", Some(a)) => {
            let parts: Vec<&str> = a.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(Error::InvalidInput(format!(
                    "cosine density needs two numbers, got {a:?}"
                )));
            }
            let base: f64 = parts[0]
                .parse()
                .map_err(|_| Error::InvalidInput(format!("cosine base: bad number {:?}", parts[0])))?;
            let amplitude: f64 = parts[1].parse().map_err(|_| {
                Error::InvalidInput(format!("cosine amplitude: bad number {:?}", parts[1]))
            })?;
            Ok(DensitySpec::Cosine { base, amplitude })
        }
        ("cosine", None) => Err(Error::InvalidInput(
            "cosine density needs arguments, e.g. cosine:1,0.5".into(),
        )),
        ("atoms", Some(path)) if !path.is_empty() => Ok(DensitySpec::AtomsFile(path.to_string())),
        ("table", Some(path)) if !path.is_empty() => Ok(DensitySpec::TableFile(path.to_string())),
        _ => Err(Error::InvalidInput(format!(
            "unknown density spec {text:?}; expected constant[:c], cosine:a,b, atoms:file, table:file"
        ))),
    }
}

/// Parses the general-measure JSON format: optional `density` (spec string or
/// structured) plus optional `atoms`. File-referencing specs are rejected
/// here; resolve them first.
pub fn general_measure_from_json(text: &str) -> Result<GeneralMeasure> {
    let dto: GeneralMeasureDto = serde_json::from_str(text).map_err(bad_json)?;
    let density = match dto.density {
        None => None,
        Some(DensityDto::Spec(s)) => match parse_density_spec(&s)? {
            DensitySpec::Constant(c) => Some(Density::Constant(c)),
            DensitySpec::Cosine { base, amplitude } => Some(Density::Cosine { base, amplitude }),
            DensitySpec::Table(knots) => Some(Density::Table(knots)),
            DensitySpec::AtomsFile(_) | DensitySpec::TableFile(_) => {
                return Err(Error::InvalidInput(
                    "file-referencing density specs are not allowed inside measure JSON".into(),
                ))
            }
        },
        Some(DensityDto::Structured(s)) => Some(match s {
            StructuredDensity::Constant(c) => Density::Constant(c),
            StructuredDensity::Cosine([base, amplitude]) => Density::Cosine { base, amplitude },
            StructuredDensity::Table(knots) => {
                Density::Table(knots.into_iter().map(|[a, v]| (a, v)).collect())
            }
        }),
    };
    let mut atoms = Vec::with_capacity(dto.atoms.len());
    for (i, atom) in dto.atoms.iter().enumerate() {
        let angle = match (atom.angle, atom.dir) {
            (Some(a), None) => a,
            (None, Some(d)) => Direction::new(d[0], d[1])?.angle(),
            _ => {
                return Err(Error::InvalidInput(format!(
                    "atom {i}: provide exactly one of \"angle\" or \"dir\""
                )))
            }
        };
        atoms.push((angle, atom.weight));
    }
    GeneralMeasure::new(density, atoms)
}

// ---------------------------------------------------------------------------
// schedules and CSV
// ---------------------------------------------------------------------------

/// Parses a comma-separated list of positive integers, e.g. `"4,8,16"`.
pub fn parse_schedule(text: &str) -> Result<Vec<u32>> {
    let items: Vec<&str> = text.split(',').map(str::trim).collect();
    if items.iter().all(|s| s.is_empty()) {
        return Err(Error::InvalidSchedule("empty schedule".into()));
    }
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        let v: u32 = item
            .parse()
            .map_err(|_| Error::InvalidSchedule(format!("bad entry {item:?}")))?;
        if v == 0 {
            return Err(Error::InvalidSchedule("entries must be at least 1".into()));
        }
        out.push(v);
    }
    Ok(out)
}

pub fn convergence_table_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("level,nodes,T,energy,sum_mu,identity_gap\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.17e},{:.17e},{:.17e},{:.17e}\n",
            r.level, r.nodes, r.t, r.energy, r.sum_mu, r.identity_gap
        ));
    }
    out
}

pub fn trace_csv(trace: &[f64]) -> String {
    let mut out = String::from("iteration,objective\n");
    for (i, v) in trace.iter().enumerate() {
        out.push_str(&format!("{i},{v:.17e}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_round_trip() {
        let text = r#"{"atoms":[
            {"angle": 0.0, "weight": 1.0},
            {"dir": [0.0, 2.0], "weight": 0.5},
            {"angle": 3.141592653589793, "weight": 1.5},
            {"angle": 4.5, "weight": 0.25}
        ]}"#;
        let mu = measure_from_json(text).unwrap();
        assert_eq!(mu.len(), 4);
        assert!((mu.atoms()[1].direction.y() - 1.0).abs() < 1e-15);
        let again = measure_from_json(&measure_to_json(&mu)).unwrap();
        assert_eq!(again.len(), 4);
        for (a, b) in mu.atoms().iter().zip(again.atoms()) {
            assert!(a.direction.separation(b.direction) < 1e-15);
            assert_eq!(a.weight, b.weight);
        }
    }

    #[test]
    fn measure_rejects_bad_atoms() {
        assert!(measure_from_json("{").is_err());
        assert!(measure_from_json(r#"{"atoms":[]}"#).is_err());
        assert!(
            measure_from_json(r#"{"atoms":[{"angle":0,"dir":[1,0],"weight":1}]}"#).is_err(),
            "both angle and dir must be rejected"
        );
        assert!(measure_from_json(r#"{"atoms":[{"weight":1}]}"#).is_err());
        assert!(measure_from_json(
            r#"{"atoms":[{"angle":0,"weight":1},{"angle":1,"weight":-2},{"angle":2,"weight":1}]}"#
        )
        .is_err());
    }

    #[test]
    fn polygon_round_trip_and_tamper_detection() {
        use crate::geometry::Direction;
        let dirs = [
            Direction::new(1.0, 0.0).unwrap(),
            Direction::new(0.0, 1.0).unwrap(),
            Direction::new(-1.0, 0.0).unwrap(),
            Direction::new(0.0, -1.0).unwrap(),
        ];
        let p = wulff_shape(&dirs, &[1.0, 2.0, 3.0, 0.5]).unwrap();
        let text = polygon_to_json(&p);
        let q = polygon_from_json(&text).unwrap();
        assert_eq!(p.vertices().len(), q.vertices().len());
        assert_eq!(p.supports(), q.supports());

        // nudging one vertex coordinate must break the support/vertex check
        let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        let x = doc["vertices"][0][0].as_f64().unwrap();
        doc["vertices"][0][0] = serde_json::json!(x + 0.01);
        assert!(polygon_from_json(&doc.to_string()).is_err());

        // nudging a support rebuilds a polygon whose vertices disagree
        let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        let h = doc["supports"][1].as_f64().unwrap();
        doc["supports"][1] = serde_json::json!(h + 0.01);
        assert!(polygon_from_json(&doc.to_string()).is_err());
    }

    #[test]
    fn density_spec_grammar() {
        assert_eq!(parse_density_spec("constant").unwrap(), DensitySpec::Constant(1.0));
        assert_eq!(
            parse_density_spec("constant:2.5").unwrap(),
            DensitySpec::Constant(2.5)
        );
        assert_eq!(
            parse_density_spec("cosine:1,0.5").unwrap(),
            DensitySpec::Cosine {
                base: 1.0,
                amplitude: 0.5
            }
        );
        assert_eq!(
            parse_density_spec("atoms:m.json").unwrap(),
            DensitySpec::AtomsFile("m.json".into())
        );
        assert_eq!(
            parse_density_spec("table:t.json").unwrap(),
            DensitySpec::TableFile("t.json".into())
        );
        assert!(parse_density_spec("gaussian:1").is_err());
        assert!(parse_density_spec("cosine:1").is_err());
        assert!(parse_density_spec("constant:x").is_err());
        assert!(parse_density_spec("").is_err());
    }

    #[test]
    fn general_measure_json_forms() {
        let m = general_measure_from_json(r#"{"density": "cosine:1,0.5"}"#).unwrap();
        assert!(m.density().is_some());
        let m = general_measure_from_json(
            r#"{"density": {"table": [[0, 1], [3.1, 2]]}, "atoms": [{"angle": 1, "weight": 0.5}]}"#,
        )
        .unwrap();
        assert_eq!(m.atoms().len(), 1);
        assert!(general_measure_from_json(r#"{"density": "atoms:f.json"}"#).is_err());
        assert!(general_measure_from_json(r#"{}"#).is_err(), "empty measure");
    }

    #[test]
    fn schedule_grammar() {
        assert_eq!(parse_schedule("4,8,16").unwrap(), vec![4, 8, 16]);
        assert_eq!(parse_schedule(" 2 , 3 ").unwrap(), vec![2, 3]);
        assert!(parse_schedule("").is_err());
        assert!(parse_schedule("4,0").is_err());
        assert!(parse_schedule("4,-2").is_err());
        assert!(parse_schedule("a").is_err());
    }

    #[test]
    fn csv_headers() {
        assert!(convergence_table_csv(&[]).starts_with("level,nodes,T,energy,sum_mu,identity_gap"));
        assert!(trace_csv(&[1.0]).starts_with("iteration,objective"));
    }
}

//! CSV ingestion and emission. Rows and columns in errors are 1-based and
//! count the header as row 1, so they match a text editor's line numbers.

use std::io::{Read, Write};

use nalgebra::{DVector, Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::euler_poincare::BodyVelocityPath;
use crate::frenet::{FrenetApparatus, SampledCurve};
use crate::hyperbolic::HalfPlanePath;
use crate::lie::Rotation3;
use crate::reparam::{MonotoneMap, SampledPath, ScalarDensity};

/// Accepted header shapes.
#[derive(Debug, Clone, Copy)]
pub enum HeaderSpec<'a> {
    Exact(&'a [&'a str]),
    /// Any one of several exact headers.
    OneOf(&'a [&'a [&'a str]]),
    /// `lead,prefix0,prefix1,...` with at least one indexed column.
    Indexed { lead: &'a str, prefix: &'a str },
}

impl HeaderSpec<'_> {
    fn check(&self, got: &[String]) -> std::result::Result<(), (usize, String)> {
        match self {
            HeaderSpec::Exact(want) => check_exact(want, got),
            HeaderSpec::OneOf(options) => {
                let mut best = (1, String::new());
                for want in options.iter() {
                    match check_exact(want, got) {
                        Ok(()) => return Ok(()),
                        Err(e) if e.0 >= best.0 => best = e,
                        Err(_) => {}
                    }
                }
                let listed: Vec<String> = options.iter().map(|o| o.join(",")).collect();
                Err((best.0, format!("header must be one of [{}]", listed.join("] or ["))))
            }
            HeaderSpec::Indexed { lead, prefix } => {
                if got.first().map(String::as_str) != Some(*lead) {
                    return Err((1, format!("expected `{lead}`")));
                }
                if got.len() < 2 {
                    return Err((2, format!("expected at least one `{prefix}0` column")));
                }
                for (i, g) in got.iter().enumerate().skip(1) {
                    let want = format!("{prefix}{}", i - 1);
                    if *g != want {
                        return Err((i + 1, format!("expected `{want}`, found `{g}`")));
                    }
                }
                Ok(())
            }
        }
    }
}

fn check_exact(want: &[&str], got: &[String]) -> std::result::Result<(), (usize, String)> {
    for (i, w) in want.iter().enumerate() {
        match got.get(i) {
            Some(g) if g == w => {}
            Some(g) => return Err((i + 1, format!("expected `{w}`, found `{g}`"))),
            None => return Err((i + 1, format!("missing column `{w}`"))),
        }
    }
    if got.len() > want.len() {
        return Err((want.len() + 1, format!("unexpected column `{}`", got[want.len()])));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

fn csv_error(e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    Error::Validation {
        row,
        column: 0,
        message: e.to_string(),
    }
}

pub fn read_table<R: Read>(reader: R, spec: HeaderSpec<'_>) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r.map_err(csv_error)?,
        None => {
            return Err(Error::Validation {
                row: 1,
                column: 1,
                message: "empty file, header expected".into(),
            })
        }
    };
    let headers: Vec<String> = header.iter().map(str::to_string).collect();
    spec.check(&headers).map_err(|(column, message)| Error::Validation {
        row: 1,
        column,
        message,
    })?;
    let width = headers.len();
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let row = rec.position().map_or(rows.len() + 2, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != width {
            return Err(Error::Validation {
                row,
                column: rec.len().min(width) + 1,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        let vals = rec
            .iter()
            .enumerate()
            .map(|(j, f)| match f.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Validation {
                    row,
                    column: j + 1,
                    message: format!("`{f}` in column `{}` is not a finite number", headers[j]),
                }),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(vals);
    }
    if rows.is_empty() {
        return Err(Error::Validation {
            row: 2,
            column: 1,
            message: "no data rows".into(),
        });
    }
    Ok(Table { headers, rows })
}

/// Full-precision output, LF line endings.
pub fn write_table<W: Write>(writer: W, headers: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(headers).map_err(io)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:.16e}"))).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

fn invalid_at(row: usize, e: Error) -> Error {
    match e {
        Error::Validation { .. } => e,
        other => Error::Validation {
            row,
            column: 1,
            message: other.to_string(),
        },
    }
}

pub const CURVE_HEADER: &[&str] = &["s", "x", "y", "z"];
pub const FRAME_HEADER: &[&str] = &[
    "s", "tx", "ty", "tz", "nx", "ny", "nz", "bx", "by", "bz", "kappa", "tau", "theta",
];
pub const MAP_HEADER: &[&str] = &["x", "y"];
pub const DENSITY_HEADER: &[&str] = &["s", "m"];
pub const HALFPLANE_HEADER: &[&str] = &["t", "x1", "x2"];
pub const BODY_HEADER: &[&str] = &["t", "wx", "wy", "wz"];
pub const BODY_HEADER_WITH_R: &[&str] = &[
    "t", "wx", "wy", "wz", "R00", "R01", "R02", "R10", "R11", "R12", "R20", "R21", "R22",
];

pub fn read_curve<R: Read>(reader: R) -> Result<SampledCurve> {
    let t = read_table(reader, HeaderSpec::Exact(CURVE_HEADER))?;
    let pts = t.rows.iter().map(|r| Vector3::new(r[1], r[2], r[3])).collect();
    SampledCurve::new(t.col(0), pts).map_err(|e| invalid_at(2, e))
}

pub fn write_curve<W: Write>(writer: W, curve: &SampledCurve) -> Result<()> {
    let rows: Vec<Vec<f64>> = curve
        .s
        .iter()
        .zip(&curve.points)
        .map(|(s, p)| vec![*s, p.x, p.y, p.z])
        .collect();
    write_table(writer, CURVE_HEADER, &rows)
}

/// Frenet frames with curvature, torsion (per unit length) and a roll angle.
pub fn write_frames<W: Write>(writer: W, app: &FrenetApparatus, theta: &[f64]) -> Result<()> {
    if theta.len() != app.len() {
        return Err(Error::InvalidInput("roll angle count differs from frame count".into()));
    }
    let rows: Vec<Vec<f64>> = (0..app.len())
        .map(|i| {
            let (t, n, b) = (app.tangent[i], app.normal[i], app.binormal[i]);
            vec![
                app.s[i], t.x, t.y, t.z, n.x, n.y, n.z, b.x, b.y, b.z, app.kappa[i], app.tau[i], theta[i],
            ]
        })
        .collect();
    write_table(writer, FRAME_HEADER, &rows)
}

pub fn read_frames<R: Read>(reader: R) -> Result<Table> {
    read_table(reader, HeaderSpec::Exact(FRAME_HEADER))
}

pub fn read_map<R: Read>(reader: R) -> Result<MonotoneMap> {
    let t = read_table(reader, HeaderSpec::Exact(MAP_HEADER))?;
    MonotoneMap::new(t.col(0), t.col(1)).map_err(|e| invalid_at(2, e))
}

pub fn write_map<W: Write>(writer: W, map: &MonotoneMap) -> Result<()> {
    let rows: Vec<Vec<f64>> = map.x().iter().zip(map.y()).map(|(x, y)| vec![*x, *y]).collect();
    write_table(writer, MAP_HEADER, &rows)
}

pub fn read_density<R: Read>(reader: R) -> Result<ScalarDensity> {
    let t = read_table(reader, HeaderSpec::Exact(DENSITY_HEADER))?;
    ScalarDensity::tabulated(t.col(0), t.col(1)).map_err(|e| invalid_at(2, e))
}

pub fn read_sampled_path<R: Read>(reader: R) -> Result<SampledPath> {
    let t = read_table(reader, HeaderSpec::Indexed { lead: "t", prefix: "x" })?;
    let pts = t.rows.iter().map(|r| DVector::from_column_slice(&r[1..])).collect();
    SampledPath::new(t.col(0), pts).map_err(|e| invalid_at(2, e))
}

pub fn write_sampled_path<W: Write>(writer: W, path: &SampledPath) -> Result<()> {
    let names: Vec<String> = std::iter::once("t".to_string())
        .chain((0..path.dim()).map(|i| format!("x{i}")))
        .collect();
    let headers: Vec<&str> = names.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = path
        .t
        .iter()
        .zip(&path.points)
        .map(|(t, p)| std::iter::once(*t).chain(p.iter().copied()).collect())
        .collect();
    write_table(writer, &headers, &rows)
}

/// Velocities are rebuilt by finite differences.
pub fn read_halfplane_path<R: Read>(reader: R) -> Result<HalfPlanePath> {
    let t = read_table(reader, HeaderSpec::Exact(HALFPLANE_HEADER))?;
    let pts = t.rows.iter().map(|r| Vector2::new(r[1], r[2])).collect();
    HalfPlanePath::from_points(t.col(0), pts).map_err(|e| invalid_at(2, e))
}

pub fn write_halfplane_path<W: Write>(writer: W, path: &HalfPlanePath) -> Result<()> {
    let rows: Vec<Vec<f64>> = path.t.iter().zip(&path.x).map(|(t, x)| vec![*t, x.x, x.y]).collect();
    write_table(writer, HALFPLANE_HEADER, &rows)
}

pub fn read_body_velocity<R: Read>(reader: R) -> Result<BodyVelocityPath> {
    let t = read_table(reader, HeaderSpec::OneOf(&[BODY_HEADER, BODY_HEADER_WITH_R]))?;
    let omega = t.rows.iter().map(|r| Vector3::new(r[1], r[2], r[3])).collect();
    let rotation = if t.headers.len() == BODY_HEADER_WITH_R.len() {
        Some(
            t.rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    Rotation3::from_matrix(Matrix3::from_row_slice(&r[4..13])).map_err(|e| Error::Validation {
                        row: i + 2,
                        column: 5,
                        message: e.to_string(),
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    BodyVelocityPath::new(t.col(0), omega, rotation).map_err(|e| invalid_at(2, e))
}

pub fn write_body_velocity<W: Write>(writer: W, path: &BodyVelocityPath) -> Result<()> {
    let rows: Vec<Vec<f64>> = (0..path.len())
        .map(|i| {
            let w = path.omega[i];
            let mut row = vec![path.t[i], w.x, w.y, w.z];
            if let Some(rs) = &path.rotation {
                let m = rs[i].matrix();
                for a in 0..3 {
                    for b in 0..3 {
                        row.push(m[(a, b)]);
                    }
                }
            }
            row
        })
        .collect();
    let header = if path.rotation.is_some() { BODY_HEADER_WITH_R } else { BODY_HEADER };
    write_table(writer, header, &rows)
}

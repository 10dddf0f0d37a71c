//! Field CSV files and bundle manifests.
//!
//! A field CSV has one row per grid node (node order, `s` fastest) and the
//! columns `s, t, c{m}{n}_re, c{m}{n}_im, …`, one pair per θ-monomial
//! `θ3^m θ4^n`. A bundle is a directory with one CSV per field and a
//! `manifest.json` naming each field, its θ-exactness, the grid and the
//! case parameters.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cases::{CaseSpec, GeometryBundle};
use crate::error::{Error, Result};
use crate::field::{Field, EXACT};
use crate::grid::{ConformalGrid, GridSpec};
use crate::theta::THETA_CAP;

pub const MANIFEST: &str = "manifest.json";

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// Writes `field` as CSV.
pub fn write_field_csv<W: Write>(field: &Field, out: W) -> Result<()> {
    let grid = field.grid();
    let [d3, d4] = field.degree();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["s".to_string(), "t".to_string()];
    for m in 0..=d3 {
        for n in 0..=d4 {
            header.push(format!("c{m}{n}_re"));
            header.push(format!("c{m}{n}_im"));
        }
    }
    w.write_record(&header)
        .map_err(|e| Error::Io(e.to_string()))?;
    let mut row = Vec::with_capacity(header.len());
    for node in 0..grid.len() {
        let (i, j) = grid.ij(node);
        row.clear();
        row.push(format!("{:e}", grid.s(i)));
        row.push(format!("{:e}", grid.t(j)));
        for m in 0..=d3 {
            for n in 0..=d4 {
                let v = field.coeff(m, n, node);
                row.push(format!("{:e}", v.re));
                row.push(format!("{:e}", v.im));
            }
        }
        w.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

fn parse_monomial(name: &str) -> Option<(usize, usize, bool)> {
    let rest = name.strip_prefix('c')?;
    let (mn, part) = rest.split_once('_')?;
    let mut digits = mn.chars().map(|c| c.to_digit(10).map(|d| d as usize));
    let m = digits.next()??;
    let n = digits.next()??;
    if digits.next().is_some() {
        return None;
    }
    match part {
        "re" => Some((m, n, false)),
        "im" => Some((m, n, true)),
        _ => None,
    }
}

/// Reads a field CSV sampled on `grid`. Coordinates must match the grid.
pub fn read_field_csv<R: Read>(
    input: R,
    grid: &Arc<ConformalGrid>,
    exact: [i16; 2],
) -> Result<Field> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| Error::Io(e.to_string()))?.clone();
    if header.len() < 2 || &header[0] != "s" || &header[1] != "t" {
        return Err(Error::Parse("field CSV must start with columns s,t".into()));
    }
    let mut cols = Vec::new();
    let mut deg = [0usize; 2];
    for name in header.iter().skip(2) {
        let (m, n, im) =
            parse_monomial(name).ok_or_else(|| Error::Parse(format!("unknown column `{name}`")))?;
        if m > THETA_CAP || n > THETA_CAP {
            return Err(Error::Parse(format!(
                "column `{name}` above θ cap {THETA_CAP}"
            )));
        }
        deg = [deg[0].max(m), deg[1].max(n)];
        cols.push((m, n, im));
    }
    let width = deg[1] + 1;
    let mut planes = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; (deg[0] + 1) * width];
    let tol = 1e-9 * grid.spec().half_width.max(1.0);
    let mut count = 0;
    for (node, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
        if node >= grid.len() {
            return Err(Error::Grid(format!(
                "more rows than the {} grid nodes",
                grid.len()
            )));
        }
        let num = |k: usize| -> Result<f64> {
            rec.get(k)
                .ok_or_else(|| Error::Parse(format!("row {}: missing column {k}", node + 1)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", node + 1)))
        };
        let (i, j) = grid.ij(node);
        if (num(0)? - grid.s(i)).abs() > tol || (num(1)? - grid.t(j)).abs() > tol {
            return Err(Error::Grid(format!(
                "row {} at ({}, {}) does not match grid node ({}, {})",
                node + 1,
                num(0)?,
                num(1)?,
                grid.s(i),
                grid.t(j)
            )));
        }
        for (k, &(m, n, im)) in cols.iter().enumerate() {
            let v = num(k + 2)?;
            let slot = &mut planes[m * width + n][node];
            if im {
                slot.im = v;
            } else {
                slot.re = v;
            }
        }
        count += 1;
    }
    if count != grid.len() {
        return Err(Error::Grid(format!(
            "{count} rows for {} grid nodes",
            grid.len()
        )));
    }
    let exact = [0, 1].map(|v| if deg[v] == 0 { EXACT } else { exact[v] });
    Field::from_planes(grid, deg, exact, planes)
}

pub fn read_field_file(path: &Path, grid: &Arc<ConformalGrid>) -> Result<Field> {
    let f = fs::File::open(path).map_err(|e| io_err(path, e))?;
    read_field_csv(f, grid, [EXACT, EXACT]).map_err(|e| match e {
        Error::Parse(m) | Error::Io(m) => io_err(path, m),
        other => other,
    })
}

pub fn write_field_file(path: &Path, field: &Field) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    write_field_csv(field, std::io::BufWriter::new(f))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    /// θ-exactness per variable; omitted for exact polynomials.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exactness: Option<[i16; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(flatten)]
    pub case: CaseSpec,
    pub grid: GridSpec,
    pub fields: BTreeMap<String, ManifestEntry>,
}

/// Writes every field of `bundle` and a manifest into `dir`.
pub fn write_bundle(dir: &Path, spec: &CaseSpec, bundle: &GeometryBundle) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let grid = bundle.grid()?;
    let mut fields = BTreeMap::new();
    for (k, (name, field)) in bundle.iter().enumerate() {
        let file = format!("{k:02}_{name}.csv");
        write_field_file(&dir.join(&file), field)?;
        let ex = field.exactness();
        let exactness = (ex != [EXACT, EXACT]).then_some(ex);
        fields.insert(name.to_string(), ManifestEntry { file, exactness });
    }
    let manifest = Manifest {
        case: spec.clone(),
        grid: grid.spec(),
        fields,
    };
    let path = dir.join(MANIFEST);
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))?;
    Ok(path)
}

/// Reads a bundle from a manifest path or its directory.
pub fn read_bundle(path: &Path) -> Result<(CaseSpec, GeometryBundle)> {
    let manifest_path = if path.is_dir() {
        path.join(MANIFEST)
    } else {
        path.to_path_buf()
    };
    let dir = manifest_path
        .parent()
        .unwrap_or(Path::new("."))
        .to_path_buf();
    let text = fs::read_to_string(&manifest_path).map_err(|e| io_err(&manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| io_err(&manifest_path, e))?;
    let grid = Arc::new(ConformalGrid::from_spec(manifest.grid)?);
    let mut bundle = GeometryBundle::new();
    for (name, entry) in manifest.fields {
        let p = dir.join(&entry.file);
        let f = fs::File::open(&p).map_err(|e| io_err(&p, e))?;
        let field = read_field_csv(f, &grid, entry.exactness.unwrap_or([EXACT, EXACT]))?;
        bundle.insert(&name, field);
    }
    Ok((manifest.case, bundle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::{ThetaPoly, ThetaVar};

    #[test]
    fn csv_round_trip_is_exact() {
        let g = Arc::new(ConformalGrid::new([0.2, -0.1], 0.5, 7).unwrap());
        let f = Field::from_fn(&g, |x| (x * 0.37).exp())
            * (Field::theta(&g, ThetaVar::Theta3) + 0.1)
            + Field::from_theta(
                &g,
                &ThetaPoly::monomial(1, 1, Complex64::new(1.0 / 3.0, -2.0)),
            );
        let mut buf = Vec::new();
        write_field_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("s,t,c00_re,c00_im,c01_re,c01_im,c10_re"));
        assert!(!text.contains('\r'));
        let back = read_field_csv(buf.as_slice(), &g, [EXACT, EXACT]).unwrap();
        assert_eq!(back.degree(), f.degree());
        for m in 0..=1 {
            for n in 0..=1 {
                assert_eq!(back.plane(m, n), f.plane(m, n));
            }
        }
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let g = Arc::new(ConformalGrid::unit_square(5).unwrap());
        let f = Field::constant(&g, 1.0);
        let mut buf = Vec::new();
        write_field_csv(&f, &mut buf).unwrap();
        let other = Arc::new(ConformalGrid::new([0.0, 0.0], 2.0, 5).unwrap());
        assert!(matches!(
            read_field_csv(buf.as_slice(), &other, [EXACT, EXACT]),
            Err(Error::Grid(_))
        ));
        let bigger = Arc::new(ConformalGrid::unit_square(7).unwrap());
        assert!(read_field_csv(buf.as_slice(), &bigger, [EXACT, EXACT]).is_err());
    }
}

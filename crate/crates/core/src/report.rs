//! Residual reports: per-equation, per-θ-sector norms over the report region.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::field::Field;
use crate::grid::ConformalGrid;

/// Max-norm and RMS bounds a residual must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub max: f64,
    pub l2: f64,
}

impl Tolerance {
    /// Default `50 h²` (max) and `10 h²` (RMS).
    pub fn for_h(h: f64) -> Self {
        Self {
            max: 50.0 * h * h,
            l2: 10.0 * h * h,
        }
    }

    pub fn for_grid(grid: &ConformalGrid) -> Self {
        Self::for_h(grid.h())
    }

    /// User override of the max bound; the RMS bound keeps the default ratio.
    pub fn with_max(max: f64) -> Self {
        Self { max, l2: max / 5.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub h: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualEntry {
    pub label: String,
    pub i: Option<u8>,
    pub j: Option<u8>,
    /// θ-monomial `[m, n]` of `θ3^m θ4^n`.
    pub sector: [usize; 2],
    pub max: f64,
    pub l2: f64,
    /// Entry-specific max bound overriding the report tolerance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

impl ResidualEntry {
    pub fn passes(&self, tol: &Tolerance) -> bool {
        match self.tol {
            Some(t) => self.max <= t,
            None => self.max <= tol.max && self.l2 <= tol.l2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub case: String,
    pub grid: GridSummary,
    pub pairs: Vec<ResidualEntry>,
    pub overall_max: f64,
    pub pass: bool,
    pub tolerance: Tolerance,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl ResidualReport {
    pub fn new(case: impl Into<String>, grid: &ConformalGrid, tolerance: Tolerance) -> Self {
        Self {
            case: case.into(),
            grid: GridSummary {
                h: grid.h(),
                n: grid.n(),
            },
            pairs: Vec::new(),
            overall_max: 0.0,
            pass: true,
            tolerance,
            extra: BTreeMap::new(),
        }
    }

    fn refresh(&mut self) {
        self.overall_max = self.pairs.iter().map(|e| e.max).fold(0.0, f64::max);
        self.pass = self.pairs.iter().all(|e| e.passes(&self.tolerance))
            && self
                .pairs
                .iter()
                .all(|e| e.max.is_finite() && e.l2.is_finite())
            && !self.extra.contains_key("failures");
    }

    pub fn push(&mut self, entry: ResidualEntry) {
        self.pairs.push(entry);
        self.refresh();
    }

    /// Adds one entry per certified θ-sector of `residual`.
    pub fn push_field(&mut self, label: &str, ij: Option<(u8, u8)>, residual: &Field) {
        self.push_field_with_tol(label, ij, residual, None);
    }

    pub fn push_field_with_tol(
        &mut self,
        label: &str,
        ij: Option<(u8, u8)>,
        residual: &Field,
        tol: Option<f64>,
    ) {
        let nodes = residual.grid().report_nodes();
        for sector in residual.certified_sectors() {
            let (max, l2) = norms(residual, sector, &nodes);
            self.pairs.push(ResidualEntry {
                label: label.to_string(),
                i: ij.map(|p| p.0),
                j: ij.map(|p| p.1),
                sector,
                max,
                l2,
                tol,
            });
        }
        self.refresh();
    }

    /// Adds one entry per θ-sector, aggregated over all entries of a matrix
    /// residual (max of maxima, RMS over entries and nodes).
    pub fn push_matrix(&mut self, label: &str, ij: Option<(u8, u8)>, entries: &[Field]) {
        let mut acc: BTreeMap<[usize; 2], (f64, f64, usize)> = BTreeMap::new();
        for f in entries {
            let nodes = f.grid().report_nodes();
            for sector in f.certified_sectors() {
                let (max, l2) = norms(f, sector, &nodes);
                let e = acc.entry(sector).or_insert((0.0, 0.0, 0));
                e.0 = e.0.max(max);
                e.1 += l2 * l2;
                e.2 += 1;
            }
        }
        if acc.is_empty() {
            acc.insert([0, 0], (0.0, 0.0, 1));
        }
        let count = entries.len().max(1) as f64;
        for (sector, (max, sq, _)) in acc {
            self.pairs.push(ResidualEntry {
                label: label.to_string(),
                i: ij.map(|p| p.0),
                j: ij.map(|p| p.1),
                sector,
                max,
                l2: (sq / count).sqrt(),
                tol: None,
            });
        }
        self.refresh();
    }

    pub fn set_extra(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.extra.insert(key.to_string(), v);
    }

    /// Marks the report failed for a reason outside the residual entries.
    pub fn fail(&mut self, reason: &str) {
        let mut reasons = self.failures();
        reasons.push(reason.to_string());
        self.set_extra("failures", reasons);
        self.pass = false;
    }

    pub fn failures(&self) -> Vec<String> {
        self.extra
            .get("failures")
            .and_then(|v| serde_json::from_value(v.clone()).ok())
            .unwrap_or_default()
    }

    /// Appends the entries of `other`, prefixing their labels.
    pub fn absorb(&mut self, prefix: &str, mut other: ResidualReport) {
        for reason in other.failures() {
            self.fail(&format!("{prefix}{reason}"));
        }
        other.extra.remove("failures");
        for mut e in other.pairs {
            e.label = format!("{prefix}{}", e.label);
            if e.tol.is_none() && !e.passes(&self.tolerance) && e.passes(&other.tolerance) {
                e.tol = Some(other.tolerance.max);
            }
            self.pairs.push(e);
        }
        for (k, v) in other.extra {
            self.extra.insert(format!("{prefix}{k}"), v);
        }
        self.refresh();
    }

    pub fn entries_labelled<'a>(
        &'a self,
        label: &'a str,
    ) -> impl Iterator<Item = &'a ResidualEntry> + 'a {
        self.pairs.iter().filter(move |e| e.label == label)
    }

    /// Largest max-norm among entries with this label.
    pub fn max_of(&self, label: &str) -> f64 {
        self.entries_labelled(label)
            .map(|e| e.max)
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn norms(f: &Field, sector: [usize; 2], nodes: &[usize]) -> (f64, f64) {
    let Some(plane) = f.plane(sector[0], sector[1]) else {
        return (0.0, 0.0);
    };
    let mut max = 0.0f64;
    let mut sq = 0.0;
    for &k in nodes {
        let v = plane[k].norm();
        if v.is_nan() {
            return (f64::NAN, f64::NAN);
        }
        max = max.max(v);
        sq += v * v;
    }
    let l2 = if nodes.is_empty() {
        0.0
    } else {
        (sq / nodes.len() as f64).sqrt()
    };
    (max, l2)
}

//! Plain-text artifacts: curves as CSV and JSON, flow traces, sweepout bundles, `A^c`
//! profiles, SVG plots, and the figure tables with their reference data.

pub mod figures;
pub mod svg;

use std::collections::BTreeMap;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::curve::{CurveKind, DiscreteCurve, Region};
use crate::error::{Error, Result};
use crate::geometry::{Point, SurfaceModel};
use crate::minmax::{Slices, Sweepout};
use crate::shortening::FlowRecord;

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::Invalid(format!("csv: {e}"))
}

/// Writes `rows` under `header`; floats use the shortest representation that round-trips.
pub fn write_csv<R: Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(csv_error)?;
    String::from_utf8(bytes).map_err(csv_error)
}

/// Reads rows after a header line, checking the header names.
pub fn read_csv<R: DeserializeOwned>(text: &str, header: &[&str]) -> Result<Vec<R>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let found: Vec<String> = r.headers().map_err(csv_error)?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(Error::Invalid(format!("csv header {found:?}, expected {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(csv_error)).collect()
}

/// One vertex row `x,y` per vertex.
pub fn curve_to_csv(curve: &DiscreteCurve) -> Result<String> {
    write_csv(&["x", "y"], curve.vertices.iter().map(|p| (p.x, p.y)))
}

/// Rebuilds a curve of the given kind from vertex rows.
pub fn curve_from_csv(text: &str, kind: CurveKind) -> Result<DiscreteCurve> {
    let rows: Vec<(f64, f64)> = read_csv(text, &["x", "y"])?;
    let vertices: Vec<Point> = rows.into_iter().map(|(x, y)| Point::new(x, y)).collect();
    match kind {
        CurveKind::Closed { shift } => DiscreteCurve::closed(vertices, shift),
        CurveKind::Pinned => DiscreteCurve::pinned(vertices),
    }
}

/// A curve with the surface it lives on and free-form metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveDocument {
    pub surface: SurfaceModel,
    pub curve: DiscreteCurve,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl CurveDocument {
    pub fn new(surface: &SurfaceModel, curve: &DiscreteCurve) -> Self {
        CurveDocument { surface: surface.clone(), curve: curve.clone(), metadata: BTreeMap::new() }
    }

    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        from_json(text)
    }
}

/// Pretty JSON; every float is written so that it parses back to the same bits.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Invalid(format!("json: {e}")))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Invalid(format!("json: {e}")))
}

/// Parses a surface configuration: a TOML table tagged by `family`, validated.
pub fn surface_from_toml(text: &str) -> Result<SurfaceModel> {
    let surface: SurfaceModel = toml::from_str(text).map_err(|e| Error::Invalid(format!("surface config: {e}")))?;
    surface.validate()?;
    Ok(surface)
}

pub fn surface_to_toml(surface: &SurfaceModel) -> Result<String> {
    toml::to_string(surface).map_err(|e| Error::Invalid(format!("surface config: {e}")))
}

/// Columns `step, length, area, ac, max_residual`.
pub fn flow_trace_csv(records: &[FlowRecord]) -> Result<String> {
    write_csv(
        &["step", "length", "area", "ac", "max_residual"],
        records.iter().map(|r| (r.step, r.length, r.area, r.ac, r.max_residual)),
    )
}

/// Columns `t, ac`.
pub fn profile_csv(params: &[f64], values: &[f64]) -> Result<String> {
    if params.len() != values.len() {
        return Err(Error::Invalid(format!("{} parameters for {} values", params.len(), values.len())));
    }
    write_csv(&["t", "ac"], params.iter().zip(values))
}

/// Boundary curves and witnesses of a region, without the cached decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionRecord {
    pub boundary: Vec<DiscreteCurve>,
    pub witnesses: Vec<Point>,
    pub area: f64,
}

impl RegionRecord {
    pub fn new(region: &Region) -> Self {
        RegionRecord { boundary: region.boundary.clone(), witnesses: region.witnesses.clone(), area: region.area() }
    }

    pub fn to_region(&self, surface: &SurfaceModel) -> Result<Region> {
        if self.boundary.is_empty() {
            return match self.witnesses.first() {
                Some(w) => Region::full(surface, *w),
                None => Ok(Region::empty()),
            };
        }
        Region::new(surface, self.boundary.clone(), self.witnesses.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "slices", rename_all = "snake_case")]
pub enum BundleSlices {
    Regions(Vec<RegionRecord>),
    Paths(Vec<DiscreteCurve>),
}

/// Sweepout slices with their parameters and functional values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepoutBundle {
    pub surface: SurfaceModel,
    pub c: f64,
    pub params: Vec<f64>,
    /// `A^c` of region slices, length of path slices.
    pub values: Vec<f64>,
    pub slices: BundleSlices,
}

impl SweepoutBundle {
    pub fn new(surface: &SurfaceModel, sweepout: &Sweepout, c: f64) -> Self {
        let slices = match &sweepout.slices {
            Slices::Regions(r) => BundleSlices::Regions(r.iter().map(RegionRecord::new).collect()),
            Slices::Paths(p) => BundleSlices::Paths(p.clone()),
        };
        SweepoutBundle {
            surface: surface.clone(),
            c,
            params: sweepout.params.clone(),
            values: sweepout.values(surface, c),
            slices,
        }
    }

    /// Boundary curves of every slice.
    pub fn slice_curves(&self) -> Vec<Vec<DiscreteCurve>> {
        match &self.slices {
            BundleSlices::Regions(r) => r.iter().map(|r| r.boundary.clone()).collect(),
            BundleSlices::Paths(p) => p.iter().map(|p| vec![p.clone()]).collect(),
        }
    }

    pub fn profile_csv(&self) -> Result<String> {
        profile_csv(&self.params, &self.values)
    }

    pub fn to_json(&self) -> Result<String> {
        to_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        from_json(text)
    }
}

/// Chart polyline of a curve; closed curves repeat the first vertex shifted by the period.
pub fn polyline(curve: &DiscreteCurve) -> Vec<Point> {
    let mut v = curve.vertices.clone();
    if curve.is_closed() {
        v.push(curve.vertices[0] + curve.shift());
    }
    v
}

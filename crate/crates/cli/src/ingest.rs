//! CSV readers for the raw data files.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use chargeplan::costing::haversine_km;
use chargeplan::DistanceTable;

use crate::error::{CliError, CliResult};

pub const HOURS: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct SiteRow {
    pub id: String,
    pub lat: f64,
    pub lon: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoiRow {
    pub id: String,
    pub category: String,
    pub lat: f64,
    pub lon: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Junction {
    pub id: String,
    pub lat: f64,
    pub lon: f64,
    pub density: f64,
}

/// Hourly energy per site, restricted to the selected hours.
#[derive(Clone, Debug, PartialEq)]
pub struct DemandTable {
    pub hours: Vec<usize>,
    pub rows: BTreeMap<String, Vec<f64>>,
}

impl DemandTable {
    pub fn total(&self, site: &str) -> Option<f64> {
        self.rows.get(site).map(|r| r.iter().sum())
    }

    pub fn peak(&self, site: &str) -> Option<f64> {
        self.rows.get(site).map(|r| r.iter().copied().fold(0.0, f64::max))
    }
}

pub fn hour_column(h: usize) -> String {
    format!("h{h:02}")
}

/// Parses an hour filter such as `7-9,17`.
pub fn parse_hours(spec: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Config(format!("invalid hour filter '{spec}'"));
    let mut hours = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (lo, hi) = match part.split_once('-') {
            Some((a, b)) => (a.trim().parse::<usize>(), b.trim().parse::<usize>()),
            None => (part.parse(), part.parse()),
        };
        let (lo, hi) = (lo.map_err(|_| bad())?, hi.map_err(|_| bad())?);
        if lo > hi || hi >= HOURS {
            return Err(bad());
        }
        hours.extend(lo..=hi);
    }
    hours.sort_unstable();
    hours.dedup();
    if hours.is_empty() {
        return Err(bad());
    }
    Ok(hours)
}

struct Table {
    path: PathBuf,
    reader: csv::Reader<std::fs::File>,
    header: Vec<String>,
}

impl Table {
    fn open(path: &Path) -> CliResult<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| match e.into_kind() {
                csv::ErrorKind::Io(io) => CliError::read(path, io),
                other => CliError::parse(path, 1, format!("{other:?}")),
            })?;
        let header = reader
            .headers()
            .map_err(|e| CliError::parse(path, 1, e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        Ok(Table {
            path: path.to_path_buf(),
            reader,
            header,
        })
    }

    fn column(&self, name: &str) -> CliResult<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::schema(&self.path, name))
    }

    /// Calls `f` with each record and its 1-based line number.
    fn for_each(
        mut self,
        mut f: impl FnMut(&Path, u64, &csv::StringRecord) -> CliResult<()>,
    ) -> CliResult<()> {
        for rec in self.reader.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                CliError::parse(&self.path, line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            f(&self.path, line, &rec)?;
        }
        Ok(())
    }
}

fn number(path: &Path, line: u64, column: &str, cell: &str) -> CliResult<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::parse(
            path,
            line,
            format!("column '{column}': '{cell}' is not a finite number"),
        )),
    }
}

fn text(path: &Path, line: u64, column: &str, cell: &str) -> CliResult<String> {
    if cell.is_empty() {
        return Err(CliError::parse(path, line, format!("column '{column}' is empty")));
    }
    Ok(cell.to_string())
}

fn check_unique<'a>(path: &Path, ids: impl Iterator<Item = (&'a str, u64)>) -> CliResult<()> {
    let mut seen = HashMap::new();
    for (id, line) in ids {
        if let Some(first) = seen.insert(id, line) {
            return Err(CliError::parse(
                path,
                line,
                format!("duplicate id '{id}' (first on line {first})"),
            ));
        }
    }
    Ok(())
}

pub fn read_sites(path: &Path) -> CliResult<Vec<SiteRow>> {
    let t = Table::open(path)?;
    let (ci, cla, clo) = (t.column("site_id")?, t.column("lat")?, t.column("lon")?);
    let mut out = Vec::new();
    let mut lines = Vec::new();
    t.for_each(|p, line, r| {
        out.push(SiteRow {
            id: text(p, line, "site_id", &r[ci])?,
            lat: number(p, line, "lat", &r[cla])?,
            lon: number(p, line, "lon", &r[clo])?,
        });
        lines.push(line);
        Ok(())
    })?;
    check_unique(path, out.iter().map(|s| s.id.as_str()).zip(lines))?;
    if out.is_empty() {
        return Err(CliError::Config(format!("{}: no sites", path.display())));
    }
    Ok(out)
}

pub fn read_demand(path: &Path, hours: &[usize]) -> CliResult<DemandTable> {
    let t = Table::open(path)?;
    let ci = t.column("site_id")?;
    let cols: Vec<(String, usize)> = hours
        .iter()
        .map(|&h| {
            let name = hour_column(h);
            t.column(&name).map(|c| (name, c))
        })
        .collect::<CliResult<_>>()?;
    let mut rows = BTreeMap::new();
    let mut lines = Vec::new();
    let mut ids = Vec::new();
    t.for_each(|p, line, r| {
        let id = text(p, line, "site_id", &r[ci])?;
        let vals = cols
            .iter()
            .map(|(name, c)| {
                let v = number(p, line, name, &r[*c])?;
                if v < 0.0 {
                    return Err(CliError::parse(p, line, format!("column '{name}': negative demand {v}")));
                }
                Ok(v)
            })
            .collect::<CliResult<Vec<f64>>>()?;
        ids.push(id.clone());
        lines.push(line);
        rows.insert(id, vals);
        Ok(())
    })?;
    check_unique(path, ids.iter().map(String::as_str).zip(lines))?;
    Ok(DemandTable {
        hours: hours.to_vec(),
        rows,
    })
}

pub fn read_pois(path: &Path) -> CliResult<Vec<PoiRow>> {
    let t = Table::open(path)?;
    let (ci, cc, cla, clo) = (
        t.column("poi_id")?,
        t.column("category")?,
        t.column("lat")?,
        t.column("lon")?,
    );
    let mut out = Vec::new();
    t.for_each(|p, line, r| {
        out.push(PoiRow {
            id: text(p, line, "poi_id", &r[ci])?,
            category: text(p, line, "category", &r[cc])?,
            lat: number(p, line, "lat", &r[cla])?,
            lon: number(p, line, "lon", &r[clo])?,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn read_junctions(path: &Path) -> CliResult<Vec<Junction>> {
    let t = Table::open(path)?;
    let (ci, cla, clo, cd) = (
        t.column("junction_id")?,
        t.column("lat")?,
        t.column("lon")?,
        t.column("density")?,
    );
    let mut out = Vec::new();
    let mut lines = Vec::new();
    t.for_each(|p, line, r| {
        out.push(Junction {
            id: text(p, line, "junction_id", &r[ci])?,
            lat: number(p, line, "lat", &r[cla])?,
            lon: number(p, line, "lon", &r[clo])?,
            density: number(p, line, "density", &r[cd])?,
        });
        lines.push(line);
        Ok(())
    })?;
    check_unique(path, out.iter().map(|j| j.id.as_str()).zip(lines))?;
    Ok(out)
}

/// Interest-by-site distances: haversine from coordinates, with entries from
/// an optional override file replacing individual pairs.
pub fn distance_table(
    interests: &[(String, f64, f64)],
    sites: &[SiteRow],
    overrides: Option<&Path>,
) -> CliResult<DistanceTable> {
    let mut data: Vec<f64> = interests
        .iter()
        .flat_map(|(_, la, lo)| sites.iter().map(move |s| haversine_km(*la, *lo, s.lat, s.lon)))
        .collect();
    if let Some(path) = overrides {
        let interest_idx: HashMap<&str, usize> =
            interests.iter().enumerate().map(|(k, (id, _, _))| (id.as_str(), k)).collect();
        let site_idx: HashMap<&str, usize> =
            sites.iter().enumerate().map(|(k, s)| (s.id.as_str(), k)).collect();
        let t = Table::open(path)?;
        let (ci, cs, ck) = (t.column("interest_id")?, t.column("site_id")?, t.column("km")?);
        let n = sites.len();
        t.for_each(|p, line, r| {
            let i = *interest_idx
                .get(&r[ci])
                .ok_or_else(|| CliError::parse(p, line, format!("unknown interest_id '{}'", &r[ci])))?;
            let s = *site_idx
                .get(&r[cs])
                .ok_or_else(|| CliError::parse(p, line, format!("unknown site_id '{}'", &r[cs])))?;
            let km = number(p, line, "km", &r[ck])?;
            if km < 0.0 {
                return Err(CliError::parse(p, line, format!("negative distance {km}")));
            }
            data[i * n + s] = km;
            Ok(())
        })?;
    }
    Ok(DistanceTable::new(interests.len(), sites.len(), data)?)
}

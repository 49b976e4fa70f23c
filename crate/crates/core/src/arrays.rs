//! Array layouts: MA initial geometries, fixed-position benchmark arrays,
//! constraint validation and the plain-text geometry format.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{element_positions, ArrayGeometry, Point2};
use crate::error::{Error, Result};

/// Slack applied to region and spacing checks (meters).
pub const GEOMETRY_SLACK: f64 = 1e-12;

/// Square moving region `[-A/2, A/2]^2` and the minimum subarray spacing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    /// Side length `A` (meters).
    pub side: f64,
    /// Minimum distance between subarray centers (meters).
    pub d_min: f64,
}

impl RegionSpec {
    pub fn new(side: f64, d_min: f64) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::InvalidInput(format!("region side {side}")));
        }
        if !(d_min >= 0.0 && d_min.is_finite()) {
            return Err(Error::InvalidInput(format!("minimum spacing {d_min}")));
        }
        Ok(Self { side, d_min })
    }

    pub fn half(&self) -> f64 {
        self.side / 2.0
    }

    pub fn contains(&self, p: &Point2) -> bool {
        let h = self.half() + GEOMETRY_SLACK;
        p.x.abs() <= h && p.y.abs() <= h
    }
}

/// Default minimum spacing for `nx x ny` subarrays: `(lambda/2) max(nx, ny)`.
pub fn default_d_min(nx: usize, ny: usize, wavelength: f64) -> f64 {
    wavelength / 2.0 * nx.max(ny) as f64
}

/// Element offsets of an `nx x ny` UPA with half-wavelength spacing, centered
/// on the subarray center. Row-major (y outer, x inner).
pub fn subarray_offsets(nx: usize, ny: usize, wavelength: f64) -> Vec<Point2> {
    centered_grid(nx, ny, wavelength / 2.0, wavelength / 2.0)
}

fn centered_grid(nx: usize, ny: usize, dx: f64, dy: f64) -> Vec<Point2> {
    let cx = (nx as f64 - 1.0) / 2.0;
    let cy = (ny as f64 - 1.0) / 2.0;
    (0..ny)
        .flat_map(|iy| (0..nx).map(move |ix| Point2::new((ix as f64 - cx) * dx, (iy as f64 - cy) * dy)))
        .collect()
}

/// `ceil(sqrt(M)) x ceil(sqrt(M))` grid over the whole region, first `M`
/// points in row-major order.
pub fn init_uniform_grid(m: usize, region: RegionSpec, offsets: &[Point2]) -> Result<ArrayGeometry> {
    init_subregion_grid(m, region, 1.0, offsets)
}

/// Uniform grid inside a centered square of side `scale * A`.
pub fn init_subregion_grid(
    m: usize,
    region: RegionSpec,
    scale: f64,
    offsets: &[Point2],
) -> Result<ArrayGeometry> {
    if m == 0 {
        return Err(Error::BadShape("at least one subarray required".into()));
    }
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::InvalidInput(format!("subregion scale {scale} not in (0, 1]")));
    }
    let cols = (m as f64).sqrt().ceil() as usize;
    let spacing = scale * region.side / cols as f64;
    if m > 1 && spacing + GEOMETRY_SLACK < region.d_min {
        return Err(Error::InfeasibleSpacing { spacing, d_min: region.d_min });
    }
    let centers = centered_grid(cols, cols, spacing, spacing).into_iter().take(m).collect();
    ArrayGeometry::new(centers, offsets.to_vec(), region)
}

/// Fixed-position benchmark arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkKind {
    DenseUpa,
    SparseUpa,
    HSparseUpa,
    VSparseUpa,
    HSparseUla,
    VSparseUla,
}

impl BenchmarkKind {
    pub const ALL: [BenchmarkKind; 6] = [
        BenchmarkKind::DenseUpa,
        BenchmarkKind::SparseUpa,
        BenchmarkKind::HSparseUpa,
        BenchmarkKind::VSparseUpa,
        BenchmarkKind::HSparseUla,
        BenchmarkKind::VSparseUla,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BenchmarkKind::DenseUpa => "dense_upa",
            BenchmarkKind::SparseUpa => "sparse_upa",
            BenchmarkKind::HSparseUpa => "h_sparse_upa",
            BenchmarkKind::VSparseUpa => "v_sparse_upa",
            BenchmarkKind::HSparseUla => "h_sparse_ula",
            BenchmarkKind::VSparseUla => "v_sparse_ula",
        }
    }
}

impl fmt::Display for BenchmarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BenchmarkKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown benchmark array '{s}'")))
    }
}

/// Fixed benchmark array of `mn` single-element subarrays, centered on the
/// region. The returned geometry carries `d_min = 0` since benchmark arrays
/// are not subject to the MA spacing constraint.
pub fn benchmark_geometry(
    kind: BenchmarkKind,
    mn: usize,
    region: RegionSpec,
    wavelength: f64,
) -> Result<ArrayGeometry> {
    if mn == 0 {
        return Err(Error::BadShape("benchmark array needs at least one antenna".into()));
    }
    let dense = wavelength / 2.0;
    let a = region.side;
    let positions = match kind {
        BenchmarkKind::HSparseUla => centered_grid(mn, 1, a / mn as f64, 0.0),
        BenchmarkKind::VSparseUla => centered_grid(1, mn, 0.0, a / mn as f64),
        upa => {
            let side = (mn as f64).sqrt().round() as usize;
            if side * side != mn {
                return Err(Error::BadShape(format!("{upa} needs a square antenna count, got {mn}")));
            }
            let sparse = a / side as f64;
            let (dx, dy) = match upa {
                BenchmarkKind::DenseUpa => (dense, dense),
                BenchmarkKind::SparseUpa => (sparse, sparse),
                BenchmarkKind::HSparseUpa => (sparse, dense),
                BenchmarkKind::VSparseUpa => (dense, sparse),
                _ => unreachable!(),
            };
            centered_grid(side, side, dx, dy)
        }
    };
    ArrayGeometry::from_elements(positions, RegionSpec { side: a, d_min: 0.0 })
}

/// A broken placement constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Subarray `index` lies outside the region by `excess` meters (Chebyshev).
    OutsideRegion { index: usize, excess: f64 },
    /// Subarrays `a` and `b` are `distance` apart, `deficit` short of `d_min`.
    Spacing { a: usize, b: usize, distance: f64, deficit: f64 },
}

/// All region and minimum-spacing violations of `geom` against `region`.
pub fn validate(geom: &ArrayGeometry, region: &RegionSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    let half = region.half();
    for (i, c) in geom.centers().iter().enumerate() {
        let excess = c.x.abs().max(c.y.abs()) - half;
        if excess > GEOMETRY_SLACK {
            out.push(Violation::OutsideRegion { index: i, excess });
        }
    }
    out.extend(spacing_violations(geom.centers(), region.d_min));
    out
}

pub(crate) fn spacing_violations(centers: &[Point2], d_min: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    for a in 0..centers.len() {
        for b in a + 1..centers.len() {
            let distance = centers[a].distance(&centers[b]);
            if distance + GEOMETRY_SLACK < d_min {
                out.push(Violation::Spacing { a, b, distance, deficit: d_min - distance });
            }
        }
    }
    out
}

pub(crate) fn spacing_ok(apv: &[f64], d_min: f64) -> bool {
    let m = apv.len() / 2;
    for a in 0..m {
        for b in a + 1..m {
            let d = (apv[2 * a] - apv[2 * b]).hypot(apv[2 * a + 1] - apv[2 * b + 1]);
            if d + GEOMETRY_SLACK < d_min {
                return false;
            }
        }
    }
    true
}

/// Serialises a geometry as `m n x y` element rows (1-based indices,
/// meters), preceded by `#` metadata lines for the region.
pub fn write_geometry(geom: &ArrayGeometry) -> String {
    let mut s = String::new();
    let r = geom.region();
    let _ = writeln!(s, "# side {:.16e}", r.side);
    let _ = writeln!(s, "# d_min {:.16e}", r.d_min);
    let _ = writeln!(s, "# m n x y");
    let n = geom.elements_per_subarray();
    for (i, p) in element_positions(geom).iter().enumerate() {
        let _ = writeln!(s, "{} {} {:.16e} {:.16e}", i / n + 1, i % n + 1, p.x, p.y);
    }
    s
}

/// Parses the format produced by [`write_geometry`].
///
/// Subarray centers are recovered as the mean of each subarray's elements,
/// and offsets as element positions relative to that mean. The region
/// metadata lines are optional; `default_region` fills in what is missing.
pub fn read_geometry(text: &str, default_region: Option<RegionSpec>) -> Result<ArrayGeometry> {
    let mut side = default_region.map(|r| r.side);
    let mut d_min = default_region.map(|r| r.d_min);
    let mut rows: Vec<(usize, usize, f64, f64)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Config(format!("geometry line {}: {what}", lineno + 1));
        if let Some(meta) = line.strip_prefix('#') {
            let mut it = meta.split_whitespace();
            match (it.next(), it.next()) {
                (Some("side"), Some(v)) => side = Some(v.parse().map_err(|_| bad("bad side"))?),
                (Some("d_min"), Some(v)) => d_min = Some(v.parse().map_err(|_| bad("bad d_min"))?),
                _ => {}
            }
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(bad("expected 4 columns `m n x y`"));
        }
        let m: usize = cols[0].parse().map_err(|_| bad("bad subarray index"))?;
        let n: usize = cols[1].parse().map_err(|_| bad("bad element index"))?;
        let x: f64 = cols[2].parse().map_err(|_| bad("bad x"))?;
        let y: f64 = cols[3].parse().map_err(|_| bad("bad y"))?;
        if m == 0 || n == 0 {
            return Err(bad("indices are 1-based"));
        }
        rows.push((m, n, x, y));
    }
    let m_count = rows.iter().map(|r| r.0).max().unwrap_or(0);
    let n_count = rows.iter().map(|r| r.1).max().unwrap_or(0);
    if rows.is_empty() || rows.len() != m_count * n_count {
        return Err(Error::Config(format!(
            "geometry has {} rows, expected a full {m_count} x {n_count} table",
            rows.len()
        )));
    }
    let mut table = vec![None; m_count * n_count];
    for &(m, n, x, y) in &rows {
        let slot = &mut table[(m - 1) * n_count + (n - 1)];
        if slot.is_some() {
            return Err(Error::Config(format!("duplicate element ({m}, {n})")));
        }
        *slot = Some(Point2::new(x, y));
    }
    let table: Vec<Point2> = table.into_iter().map(|p| p.expect("filled")).collect();
    let centers: Vec<Point2> = table
        .chunks_exact(n_count)
        .map(|sub| {
            let (sx, sy) = sub.iter().fold((0.0, 0.0), |(a, b), p| (a + p.x, b + p.y));
            Point2::new(sx / n_count as f64, sy / n_count as f64)
        })
        .collect();
    let offsets: Vec<Point2> =
        table[..n_count].iter().map(|p| Point2::new(p.x - centers[0].x, p.y - centers[0].y)).collect();
    for (mi, sub) in table.chunks_exact(n_count).enumerate() {
        for (ni, p) in sub.iter().enumerate() {
            let ex = centers[mi].x + offsets[ni].x;
            let ey = centers[mi].y + offsets[ni].y;
            if (ex - p.x).abs() > 1e-9 || (ey - p.y).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "subarray {} does not share the element offsets of subarray 1",
                    mi + 1
                )));
            }
        }
    }
    let region = RegionSpec::new(
        side.ok_or_else(|| Error::Config("geometry lacks a region side".into()))?,
        d_min.unwrap_or(0.0),
    )?;
    ArrayGeometry::new(centers, offsets, region)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single() -> Vec<Point2> {
        vec![Point2::default()]
    }

    #[test]
    fn grid_2x2() {
        let r = RegionSpec::new(2.0, 0.5).unwrap();
        let g = init_uniform_grid(4, r, &single()).unwrap();
        let c = g.centers();
        assert_eq!(
            c,
            &[Point2::new(-0.5, -0.5), Point2::new(0.5, -0.5), Point2::new(-0.5, 0.5), Point2::new(0.5, 0.5)]
        );
        assert!(validate(&g, &r).is_empty());
    }

    #[test]
    fn grid_single_center() {
        let r = RegionSpec::new(1.0, 0.5).unwrap();
        let g = init_uniform_grid(1, r, &single()).unwrap();
        assert_eq!(g.centers(), &[Point2::new(0.0, 0.0)]);
    }

    #[test]
    fn grid_64_at_paper_scale() {
        let lambda = 0.01;
        let r = RegionSpec::new(100.0 * lambda, lambda / 2.0).unwrap();
        let g = init_uniform_grid(64, r, &single()).unwrap();
        assert_eq!(g.subarrays(), 64);
        let c = g.centers();
        assert_relative_eq!(c[1].x - c[0].x, 0.125, epsilon = 1e-12);
        assert_relative_eq!(c[8].y - c[0].y, 0.125, epsilon = 1e-12);
        assert_relative_eq!(c[0].x, -0.4375, epsilon = 1e-12);
        assert!(validate(&g, &r).is_empty());
    }

    #[test]
    fn grid_non_square_takes_first_m() {
        let r = RegionSpec::new(3.0, 0.1).unwrap();
        let g = init_uniform_grid(5, r, &single()).unwrap();
        assert_eq!(g.subarrays(), 5);
        // 3x3 grid with spacing 1
        assert_eq!(g.centers()[3], Point2::new(-1.0, 0.0));
    }

    #[test]
    fn grid_infeasible_spacing() {
        let r = RegionSpec::new(1.0, 0.6).unwrap();
        assert!(matches!(init_uniform_grid(4, r, &single()), Err(Error::InfeasibleSpacing { .. })));
    }

    #[test]
    fn subregion_grids() {
        let r = RegionSpec::new(4.0, 0.5).unwrap();
        let g = init_subregion_grid(4, r, 0.5, &single()).unwrap();
        assert_eq!(g.centers()[0], Point2::new(-0.5, -0.5));
        assert_eq!(g.centers()[3], Point2::new(0.5, 0.5));

        let full = init_subregion_grid(9, r, 1.0, &single()).unwrap();
        assert_eq!(full, init_uniform_grid(9, r, &single()).unwrap());

        let lambda = 0.01;
        let r = RegionSpec::new(100.0 * lambda, lambda / 2.0).unwrap();
        let g = init_subregion_grid(16, r, 0.5, &single()).unwrap();
        assert_relative_eq!(g.centers()[1].x - g.centers()[0].x, 50.0 * lambda / 4.0, epsilon = 1e-12);
        assert!(validate(&g, &r).is_empty());
    }

    #[test]
    fn benchmark_shapes() {
        let lambda = 0.01;
        let r = RegionSpec::new(1.0, 0.0).unwrap();
        let dense = benchmark_geometry(BenchmarkKind::DenseUpa, 64, r, lambda).unwrap();
        assert_relative_eq!(dense.centers()[1].x - dense.centers()[0].x, 0.005, epsilon = 1e-15);
        assert_relative_eq!(dense.centers()[8].y - dense.centers()[0].y, 0.005, epsilon = 1e-15);

        let sparse = benchmark_geometry(BenchmarkKind::SparseUpa, 64, r, lambda).unwrap();
        assert_relative_eq!(sparse.centers()[1].x - sparse.centers()[0].x, 0.125, epsilon = 1e-15);

        let hula = benchmark_geometry(BenchmarkKind::HSparseUla, 64, r, lambda).unwrap();
        assert_eq!(hula.subarrays(), 64);
        assert_relative_eq!(hula.centers()[1].x - hula.centers()[0].x, 1.0 / 64.0, epsilon = 1e-15);
        assert!(hula.centers().iter().all(|c| c.y == 0.0));

        let vula = benchmark_geometry(BenchmarkKind::VSparseUla, 64, r, lambda).unwrap();
        assert!(vula.centers().iter().all(|c| c.x == 0.0));

        let h = benchmark_geometry(BenchmarkKind::HSparseUpa, 16, r, lambda).unwrap();
        assert_relative_eq!(h.centers()[1].x - h.centers()[0].x, 0.25, epsilon = 1e-15);
        assert_relative_eq!(h.centers()[4].y - h.centers()[0].y, 0.005, epsilon = 1e-15);
        let v = benchmark_geometry(BenchmarkKind::VSparseUpa, 16, r, lambda).unwrap();
        assert_relative_eq!(v.centers()[1].x - v.centers()[0].x, 0.005, epsilon = 1e-15);
        assert_relative_eq!(v.centers()[4].y - v.centers()[0].y, 0.25, epsilon = 1e-15);

        for kind in BenchmarkKind::ALL {
            let g = benchmark_geometry(kind, 64, r, lambda).unwrap();
            assert!(validate(&g, &r).is_empty(), "{kind} leaves the region");
            assert_eq!(g, benchmark_geometry(kind, 64, r, lambda).unwrap());
        }
    }

    #[test]
    fn benchmark_rejects_non_square_upa() {
        let r = RegionSpec::new(1.0, 0.0).unwrap();
        assert!(matches!(benchmark_geometry(BenchmarkKind::SparseUpa, 12, r, 0.01), Err(Error::BadShape(_))));
        assert!(benchmark_geometry(BenchmarkKind::HSparseUla, 12, r, 0.01).is_ok());
    }

    #[test]
    fn validate_reports_spacing_and_region() {
        let r = RegionSpec::new(2.0, 0.5).unwrap();
        let eps = 1e-6;
        let g = ArrayGeometry::from_elements(vec![Point2::new(0.0, 0.0), Point2::new(0.5 - eps, 0.0)], r)
            .unwrap();
        let v = validate(&g, &r);
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::Spacing { a: 0, b: 1, .. }));

        let g = ArrayGeometry::from_elements(vec![Point2::new(1.0 + eps, 0.0)], r).unwrap();
        let v = validate(&g, &r);
        assert_eq!(v.len(), 1);
        match v[0] {
            Violation::OutsideRegion { index, excess } => {
                assert_eq!(index, 0);
                assert_relative_eq!(excess, eps, epsilon = 1e-12);
            }
            _ => panic!("expected a region violation"),
        }
    }

    #[test]
    fn geometry_text_round_trip() {
        let lambda = 0.01;
        let r = RegionSpec::new(1.0, default_d_min(2, 2, lambda)).unwrap();
        let g = init_uniform_grid(4, r, &subarray_offsets(2, 2, lambda)).unwrap();
        let text = write_geometry(&g);
        assert!(text.lines().any(|l| l.starts_with("4 4 ")));
        let back = read_geometry(&text, None).unwrap();
        assert_eq!(back.subarrays(), 4);
        assert_eq!(back.elements_per_subarray(), 4);
        assert_eq!(element_positions(&back), element_positions(&g));
        assert_eq!(back.region(), g.region());
    }

    #[test]
    fn geometry_text_rejects_ragged_table() {
        let err = read_geometry("# side 1\n1 1 0 0\n1 2 0.1 0\n2 1 0.5 0\n", None).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}

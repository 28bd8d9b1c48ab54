//! Voronoi cells of a planar point set, one cell at a time.
//!
//! A cell starts as a large square and is clipped by the perpendicular
//! bisectors of neighbours taken ring by ring from a bucket grid. Once every
//! unseen neighbour is farther than twice the current circumradius, no
//! further bisector can cut the polygon and the cell is final.

pub type Point = [f64; 2];

#[inline]
pub fn norm2(p: Point) -> f64 {
    p[0] * p[0] + p[1] * p[1]
}

/// Bucket grid over `[-half, half]²`, stored in compressed rows.
pub struct BucketGrid {
    lo: f64,
    cell: f64,
    dim: usize,
    start: Vec<usize>,
    items: Vec<u32>,
}

impl BucketGrid {
    pub fn new(points: &[Point], half: f64, cell: f64) -> Self {
        let dim = ((2.0 * half / cell).ceil() as usize).max(1);
        let lo = -half;
        let bucket_of = |p: Point| -> usize {
            let ix = (((p[0] - lo) / cell) as usize).min(dim - 1);
            let iy = (((p[1] - lo) / cell) as usize).min(dim - 1);
            iy * dim + ix
        };
        let mut counts = vec![0usize; dim * dim + 1];
        for p in points {
            counts[bucket_of(*p) + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut fill = counts.clone();
        let mut items = vec![0u32; points.len()];
        for (i, p) in points.iter().enumerate() {
            let b = bucket_of(*p);
            items[fill[b]] = i as u32;
            fill[b] += 1;
        }
        Self {
            lo,
            cell,
            dim,
            start: counts,
            items,
        }
    }

    fn coords(&self, p: Point) -> (isize, isize) {
        let ix = (((p[0] - self.lo) / self.cell).floor() as isize).clamp(0, self.dim as isize - 1);
        let iy = (((p[1] - self.lo) / self.cell).floor() as isize).clamp(0, self.dim as isize - 1);
        (ix, iy)
    }

    fn bucket(&self, ix: isize, iy: isize) -> &[u32] {
        let b = iy as usize * self.dim + ix as usize;
        &self.items[self.start[b]..self.start[b + 1]]
    }

    /// Voronoi cell of `points[i]`, clipped to the square `[-bound, bound]²`.
    pub fn cell_polygon(&self, points: &[Point], i: usize, bound: f64) -> Vec<Point> {
        let b = points[i];
        let mut poly = vec![
            [-bound, -bound],
            [bound, -bound],
            [bound, bound],
            [-bound, bound],
        ];
        let mut scratch = Vec::with_capacity(16);
        let (cx, cy) = self.coords(b);
        let d = self.dim as isize;
        let mut k: isize = 0;
        loop {
            let mut touched = false;
            for iy in (cy - k)..=(cy + k) {
                if iy < 0 || iy >= d {
                    continue;
                }
                let edge_row = iy == cy - k || iy == cy + k;
                let step = if edge_row { 1 } else { (2 * k).max(1) };
                let mut ix = cx - k;
                while ix <= cx + k {
                    if ix >= 0 && ix < d {
                        touched = true;
                        for &j in self.bucket(ix, iy) {
                            let j = j as usize;
                            if j != i {
                                clip_in_place(&mut poly, &mut scratch, b, points[j]);
                            }
                        }
                    }
                    ix += step;
                }
            }
            // Everything within k·cell of b has now been seen.
            let reach = k as f64 * self.cell;
            let r2 = poly
                .iter()
                .map(|v| norm2([v[0] - b[0], v[1] - b[1]]))
                .fold(0.0, f64::max);
            if 4.0 * r2 <= reach * reach || !touched {
                return poly;
            }
            k += 1;
        }
    }
}

/// Keeps the half of `poly` closer to `b` than to `q`.
pub fn clip_bisector(poly: &[Point], b: Point, q: Point) -> Vec<Point> {
    let mut out = poly.to_vec();
    clip_in_place(&mut out, &mut Vec::new(), b, q);
    out
}

fn clip_in_place(poly: &mut Vec<Point>, out: &mut Vec<Point>, b: Point, q: Point) {
    let n = [q[0] - b[0], q[1] - b[1]];
    let h = 0.5 * (norm2(q) - norm2(b));
    let side = |p: Point| p[0] * n[0] + p[1] * n[1] - h;
    if poly.iter().all(|p| side(*p) <= 0.0) {
        return;
    }
    out.clear();
    for idx in 0..poly.len() {
        let p = poly[idx];
        let r = poly[(idx + 1) % poly.len()];
        let (sp, sr) = (side(p), side(r));
        if sp <= 0.0 {
            out.push(p);
        }
        if (sp <= 0.0) != (sr <= 0.0) {
            let t = sp / (sp - sr);
            out.push([p[0] + t * (r[0] - p[0]), p[1] + t * (r[1] - p[1])]);
        }
    }
    std::mem::swap(poly, out);
}

/// Point-in-convex-polygon for counter-clockwise vertices.
pub fn contains(poly: &[Point], p: Point) -> bool {
    let n = poly.len();
    (0..n).all(|i| {
        let a = poly[i];
        let c = poly[(i + 1) % n];
        (c[0] - a[0]) * (p[1] - a[1]) - (c[1] - a[1]) * (p[0] - a[0]) >= 0.0
    })
}

/// Shoelace area.
pub fn area(poly: &[Point]) -> f64 {
    let n = poly.len();
    0.5 * (0..n)
        .map(|i| {
            let a = poly[i];
            let c = poly[(i + 1) % n];
            a[0] * c[1] - c[0] * a[1]
        })
        .sum::<f64>()
}

/// Axis-aligned bounding box `(min, max)`.
pub fn bounding_box(poly: &[Point]) -> (Point, Point) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in poly {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

//! Parametric spline through 2D points with chord-length knot spacing.
//!
//! The natural quintic is the default. When its parametric speed collapses
//! somewhere (the precursor of a cusp, seen with very uneven waypoint
//! spacing) the natural cubic through the same knots is used instead.

use crate::geom::Vec2;

/// Below this ratio of slowest to fastest parametric speed the quintic is
/// considered degenerate.
const MIN_SPEED_RATIO: f64 = 0.3;
const SPEED_PROBES: usize = 32;

/// Per-span quintic `sum c[k] * u^k`, with `u = t - t_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Quintic([f64; 6]);

impl Quintic {
    /// Quintic Hermite interpolant matching value, slope and second
    /// derivative at both ends of `[0, h]`.
    fn hermite(h: f64, start: [f64; 3], end: [f64; 3]) -> Self {
        let [y0, d0, s0] = start;
        let [y1, d1, s1] = end;
        let a = y1 - y0 - d0 * h - s0 * h * h / 2.0;
        let b = d1 - d0 - s0 * h;
        let c = s1 - s0;
        let h2 = h * h;
        let h3 = h2 * h;
        Quintic([
            y0,
            d0,
            s0 / 2.0,
            (20.0 * a - 8.0 * b * h + c * h2) / (2.0 * h3),
            (-30.0 * a + 14.0 * b * h - 2.0 * c * h2) / (2.0 * h3 * h),
            (12.0 * a - 6.0 * b * h + c * h2) / (2.0 * h3 * h2),
        ])
    }

    /// Value and derivatives of order 1 through 4.
    fn eval(&self, u: f64) -> [f64; 5] {
        let [c0, c1, c2, c3, c4, c5] = self.0;
        [
            c0 + u * (c1 + u * (c2 + u * (c3 + u * (c4 + u * c5)))),
            c1 + u * (2.0 * c2 + u * (3.0 * c3 + u * (4.0 * c4 + u * 5.0 * c5))),
            2.0 * c2 + u * (6.0 * c3 + u * (12.0 * c4 + u * 20.0 * c5)),
            6.0 * c3 + u * (24.0 * c4 + u * 60.0 * c5),
            24.0 * c4 + 120.0 * c5 * u,
        ]
    }
}

/// Value, first and second parametric derivative at a curve parameter.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CurvePoint {
    pub pos: Vec2,
    pub d1: Vec2,
    pub d2: Vec2,
}

impl CurvePoint {
    pub fn heading(&self) -> f64 {
        self.d1.y.atan2(self.d1.x)
    }

    /// Signed curvature, positive for left turns.
    pub fn curvature(&self) -> f64 {
        let speed = self.d1.norm();
        self.d1.cross(self.d2) / (speed * speed * speed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SplineKind {
    Quintic,
    Cubic,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ParametricSpline {
    kind: SplineKind,
    knots: Vec<f64>,
    xs: Vec<Quintic>,
    ys: Vec<Quintic>,
}

impl ParametricSpline {
    /// Builds the interpolant. Points must be pairwise distinct between neighbors.
    pub fn through(points: &[Vec2]) -> Self {
        let quintic = Self::with_kind(points, SplineKind::Quintic);
        if quintic.speed_ratio() >= MIN_SPEED_RATIO {
            quintic
        } else {
            Self::with_kind(points, SplineKind::Cubic)
        }
    }

    pub fn with_kind(points: &[Vec2], kind: SplineKind) -> Self {
        debug_assert!(points.len() >= 2);
        let mut knots = Vec::with_capacity(points.len());
        knots.push(0.0);
        for w in points.windows(2) {
            let prev = *knots.last().unwrap();
            knots.push(prev + w[0].distance(w[1]));
        }
        let values: Vec<[f64; 2]> = points.iter().map(|&p| p.into()).collect();
        let [xs, ys] = match kind {
            SplineKind::Quintic => natural_quintic(&knots, &values),
            SplineKind::Cubic => natural_cubic(&knots, &values),
        };
        Self {
            kind,
            knots,
            xs,
            ys,
        }
    }

    #[cfg(test)]
    pub fn kind(&self) -> SplineKind {
        self.kind
    }

    pub fn span_count(&self) -> usize {
        self.xs.len()
    }

    pub fn span_range(&self, span: usize) -> (f64, f64) {
        (self.knots[span], self.knots[span + 1])
    }

    /// Evaluates span `span` at local parameter `u` in `[0, h_span]`.
    pub fn eval_span(&self, span: usize, u: f64) -> CurvePoint {
        let [x, dx, ddx, ..] = self.xs[span].eval(u);
        let [y, dy, ddy, ..] = self.ys[span].eval(u);
        CurvePoint {
            pos: Vec2::new(x, y),
            d1: Vec2::new(dx, dy),
            d2: Vec2::new(ddx, ddy),
        }
    }

    pub fn speed(&self, span: usize, u: f64) -> f64 {
        self.eval_span(span, u).d1.norm()
    }

    /// Slowest over fastest parametric speed, probed along every span.
    fn speed_ratio(&self) -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for span in 0..self.span_count() {
            let (a, b) = self.span_range(span);
            for k in 0..=SPEED_PROBES {
                let v = self.speed(span, (b - a) * k as f64 / SPEED_PROBES as f64);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        lo / hi
    }
}

/// Natural quintic spline: C4 across interior knots, with vanishing third
/// and fourth derivatives at both ends.
///
/// Unknowns are the slope and second derivative at every knot; each span is
/// then the quintic Hermite interpolant of its end data.
fn natural_quintic(t: &[f64], values: &[[f64; 2]]) -> [Vec<Quintic>; 2] {
    let n = t.len() - 1;
    let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();

    if n == 1 {
        return straight(h[0], values);
    }

    // Third and fourth derivatives at both span ends, [p3(0), p4(0), p3(h), p4(h)],
    // per Hermite input [y0, d0, s0, y1, d1, s1]. The map is linear, so unit
    // inputs give its columns.
    let jets = |h: f64| -> [[f64; 4]; 6] {
        let mut cols = [[0.0; 4]; 6];
        for (k, col) in cols.iter_mut().enumerate() {
            let mut e = [0.0; 6];
            e[k] = 1.0;
            let q = Quintic::hermite(h, [e[0], e[1], e[2]], [e[3], e[4], e[5]]);
            let at0 = q.eval(0.0);
            let at1 = q.eval(h);
            *col = [at0[3], at0[4], at1[3], at1[4]];
        }
        cols
    };

    let size = 2 * (n + 1);
    let mut a = vec![vec![0.0; size]; size];
    let mut rhs = vec![[0.0; 2]; size];
    // Adds `sign * jet[j]` of span `span` to equation `row`; known values move to the rhs.
    let mut add = |row: usize, span: usize, j: usize, sign: f64, cols: &[[f64; 4]; 6]| {
        for (k, col) in cols.iter().enumerate() {
            let coef = sign * col[j];
            let knot = span + k / 3;
            match k % 3 {
                0 => {
                    for c in 0..2 {
                        rhs[row][c] -= coef * values[knot][c];
                    }
                }
                slot => a[row][2 * knot + slot - 1] += coef,
            }
        }
    };

    let span_jets: Vec<_> = h.iter().map(|&hi| jets(hi)).collect();
    add(0, 0, 0, 1.0, &span_jets[0]);
    add(1, 0, 1, 1.0, &span_jets[0]);
    for i in 1..n {
        for j in 0..2 {
            let row = 2 * i + j;
            add(row, i - 1, 2 + j, 1.0, &span_jets[i - 1]);
            add(row, i, j, -1.0, &span_jets[i]);
        }
    }
    add(size - 2, n - 1, 2, 1.0, &span_jets[n - 1]);
    add(size - 1, n - 1, 3, 1.0, &span_jets[n - 1]);

    let sol = solve_dense(a, rhs);
    spans(&h, values, |i| (sol[2 * i], sol[2 * i + 1]))
}

/// Natural cubic spline (zero second derivative at both ends), stored as
/// quintic Hermite spans that reproduce the cubic pieces exactly.
fn natural_cubic(t: &[f64], values: &[[f64; 2]]) -> [Vec<Quintic>; 2] {
    let n = t.len() - 1;
    let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    if n == 1 {
        return straight(h[0], values);
    }
    let size = n + 1;
    let mut a = vec![vec![0.0; size]; size];
    let mut rhs = vec![[0.0; 2]; size];
    a[0][0] = 1.0;
    a[n][n] = 1.0;
    for i in 1..n {
        a[i][i - 1] = h[i - 1];
        a[i][i] = 2.0 * (h[i - 1] + h[i]);
        a[i][i + 1] = h[i];
        for c in 0..2 {
            rhs[i][c] = 6.0
                * ((values[i + 1][c] - values[i][c]) / h[i]
                    - (values[i][c] - values[i - 1][c]) / h[i - 1]);
        }
    }
    let m = solve_dense(a, rhs);
    let slope = |i: usize| -> [f64; 2] {
        [0, 1].map(|c| {
            if i < n {
                (values[i + 1][c] - values[i][c]) / h[i]
                    - h[i] * (2.0 * m[i][c] + m[i + 1][c]) / 6.0
            } else {
                (values[n][c] - values[n - 1][c]) / h[n - 1]
                    + h[n - 1] * (m[n - 1][c] + 2.0 * m[n][c]) / 6.0
            }
        })
    };
    spans(&h, values, |i| (slope(i), m[i]))
}

/// Two points: the straight segment.
fn straight(h: f64, values: &[[f64; 2]]) -> [Vec<Quintic>; 2] {
    [0, 1].map(|c| {
        let slope = (values[1][c] - values[0][c]) / h;
        vec![Quintic::hermite(
            h,
            [values[0][c], slope, 0.0],
            [values[1][c], slope, 0.0],
        )]
    })
}

/// Hermite spans from per-knot (slope, second derivative) pairs.
fn spans(
    h: &[f64],
    values: &[[f64; 2]],
    jet: impl Fn(usize) -> ([f64; 2], [f64; 2]),
) -> [Vec<Quintic>; 2] {
    [0, 1].map(|c| {
        (0..h.len())
            .map(|i| {
                let (d0, s0) = jet(i);
                let (d1, s1) = jet(i + 1);
                Quintic::hermite(
                    h[i],
                    [values[i][c], d0[c], s0[c]],
                    [values[i + 1][c], d1[c], s1[c]],
                )
            })
            .collect()
    })
}

/// Gaussian elimination with partial pivoting for two right-hand sides.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty column");
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col];
        let (a_top, a_rest) = a.split_at_mut(col + 1);
        let (b_top, b_rest) = b.split_at_mut(col + 1);
        let (pivot_a, pivot_b) = (&a_top[col], b_top[col]);
        for (ra, rb) in a_rest.iter_mut().zip(b_rest) {
            let f = ra[col] / p;
            if f == 0.0 {
                continue;
            }
            for (x, y) in ra[col..].iter_mut().zip(&pivot_a[col..]) {
                *x -= f * y;
            }
            for (x, y) in rb.iter_mut().zip(pivot_b) {
                *x -= f * y;
            }
        }
    }
    let mut x = vec![[0.0; 2]; n];
    for row in (0..n).rev() {
        for c in 0..2 {
            let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k][c]).sum();
            x[row][c] = (b[row][c] - tail) / a[row][row];
        }
    }
    x
}

/// 5-point Gauss-Legendre nodes and weights on [-1, 1].
const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

pub(crate) fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GL5.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts() -> [Vec2; 5] {
        [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(2.5, 0.5),
            Vec2::new(3.0, -1.0),
            Vec2::new(4.2, -0.7),
        ]
    }

    fn knot_value(s: &ParametricSpline, i: usize) -> Vec2 {
        if i < s.span_count() {
            s.eval_span(i, 0.0).pos
        } else {
            let (a, b) = s.span_range(i - 1);
            s.eval_span(i - 1, b - a).pos
        }
    }

    #[test]
    fn interpolates_knots() {
        let pts = pts();
        for kind in [SplineKind::Quintic, SplineKind::Cubic] {
            let s = ParametricSpline::with_kind(&pts, kind);
            for (i, p) in pts.iter().enumerate() {
                let q = knot_value(&s, i);
                assert!(q.distance(*p) < 1e-12, "{kind:?} knot {i}: {q:?} vs {p:?}");
            }
        }
    }

    #[test]
    fn natural_end_conditions() {
        let s = ParametricSpline::with_kind(&pts(), SplineKind::Quintic);
        let last = s.span_count() - 1;
        let (a, b) = s.span_range(last);
        for poly in [&s.xs, &s.ys] {
            let start = poly[0].eval(0.0);
            let end = poly[last].eval(b - a);
            for jet in [start[3], start[4], end[3], end[4]] {
                assert!(jet.abs() < 1e-9, "{jet}");
            }
        }
        let c = ParametricSpline::with_kind(&pts(), SplineKind::Cubic);
        for poly in [&c.xs, &c.ys] {
            assert!(poly[0].eval(0.0)[2].abs() < 1e-12);
            assert!(poly[last].eval(b - a)[2].abs() < 1e-9);
        }
    }

    #[test]
    fn continuity_orders() {
        for (kind, orders) in [(SplineKind::Quintic, 5), (SplineKind::Cubic, 3)] {
            let s = ParametricSpline::with_kind(&pts(), kind);
            for i in 0..s.span_count() - 1 {
                let (a, b) = s.span_range(i);
                for poly in [&s.xs, &s.ys] {
                    let left = poly[i].eval(b - a);
                    let right = poly[i + 1].eval(0.0);
                    for k in 0..orders {
                        assert!(
                            (left[k] - right[k]).abs() < 1e-8,
                            "{kind:?} span {i} order {k}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn cubic_spans_are_cubic() {
        let s = ParametricSpline::with_kind(&pts(), SplineKind::Cubic);
        for poly in [&s.xs, &s.ys] {
            for q in poly {
                assert!(q.0[4].abs() < 1e-9 && q.0[5].abs() < 1e-9, "{:?}", q.0);
            }
        }
    }

    #[test]
    fn three_points_give_the_interpolating_quadratic() {
        let s = ParametricSpline::through(&[
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(2.0, 0.0),
        ]);
        assert_eq!(s.kind(), SplineKind::Quintic);
        for poly in [&s.xs, &s.ys] {
            for q in poly {
                assert!(q.0[3].abs() < 1e-9 && q.0[4].abs() < 1e-9 && q.0[5].abs() < 1e-9);
            }
        }
    }

    #[test]
    fn uneven_spacing_falls_back_to_cubic() {
        // The quintic through these collapses its speed near the start.
        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(2.892031910912895, 0.0),
            Vec2::new(3.2155256768028346, -0.23842859523686624),
            Vec2::new(3.184887500530222, -0.6601069131448903),
            Vec2::new(3.1549991742907513, -1.071464920279676),
            Vec2::new(5.273552369376125, -2.1153675878186764),
            Vec2::new(5.542657115065506, -2.2479671196709927),
            Vec2::new(5.811761860754887, -2.380566651523309),
        ];
        let q = ParametricSpline::with_kind(&pts, SplineKind::Quintic);
        assert!(q.speed_ratio() < MIN_SPEED_RATIO);
        let s = ParametricSpline::through(&pts);
        assert_eq!(s.kind(), SplineKind::Cubic);
        assert!(s.speed_ratio() > MIN_SPEED_RATIO);
    }

    #[test]
    fn hermite_reproduces_cubic() {
        let q = Quintic::hermite(2.0, [0.0, 0.0, 0.0], [8.0, 12.0, 12.0]);
        for (k, want) in [0.0, 0.0, 0.0, 1.0, 0.0, 0.0].iter().enumerate() {
            assert!((q.0[k] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_exact_for_polynomials() {
        let v = gauss_legendre(|x| x.powi(8) - 3.0 * x.powi(3), 0.0, 2.0);
        let exact = 2f64.powi(9) / 9.0 - 3.0 * 16.0 / 4.0;
        assert!((v - exact).abs() < 1e-10);
    }
}

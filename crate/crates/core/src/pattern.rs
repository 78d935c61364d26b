//! Planar point patterns on a toroidal rectangular window.

use crate::error::{Error, Result};

/// Rectangular observation window `[0, width) x [0, height)`, treated as a
/// torus for all distance computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    width: f64,
    height: f64,
}

impl Window {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::invalid("window.width", "must be positive and finite"));
        }
        if !(height.is_finite() && height > 0.0) {
            return Err(Error::invalid("window.height", "must be positive and finite"));
        }
        Ok(Window { width, height })
    }

    pub fn square(side: f64) -> Result<Self> {
        Window::new(side, side)
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn min_side(&self) -> f64 {
        self.width.min(self.height)
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * self.width, 0.5 * self.height)
    }

    pub fn contains(&self, p: Point) -> bool {
        (0.0..self.width).contains(&p.x) && (0.0..self.height).contains(&p.y)
    }

    /// Maps an arbitrary point back into the window.
    pub fn wrap(&self, p: Point) -> Point {
        let mut x = p.x.rem_euclid(self.width);
        let mut y = p.y.rem_euclid(self.height);
        // rem_euclid can round up to the modulus itself
        if x >= self.width {
            x = 0.0;
        }
        if y >= self.height {
            y = 0.0;
        }
        Point::new(x, y)
    }

    /// Minimum-image displacement from `a` to `b`.
    pub fn delta(&self, a: Point, b: Point) -> (f64, f64) {
        let mut dx = b.x - a.x;
        let mut dy = b.y - a.y;
        if dx > 0.5 * self.width {
            dx -= self.width;
        } else if dx < -0.5 * self.width {
            dx += self.width;
        }
        if dy > 0.5 * self.height {
            dy -= self.height;
        } else if dy < -0.5 * self.height {
            dy += self.height;
        }
        (dx, dy)
    }

    pub fn dist2(&self, a: Point, b: Point) -> f64 {
        let (dx, dy) = self.delta(a, b);
        dx * dx + dy * dy
    }

    pub fn dist(&self, a: Point, b: Point) -> f64 {
        self.dist2(a, b).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Finite set of points inside a [`Window`].
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    points: Vec<Point>,
    window: Window,
}

impl PointPattern {
    pub fn empty(window: Window) -> Self {
        PointPattern {
            points: Vec::new(),
            window,
        }
    }

    /// Builds a pattern, rejecting points outside the window.
    pub fn new(window: Window, points: Vec<Point>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !window.contains(**p)) {
            return Err(Error::invalid(
                "points",
                format!("({}, {}) lies outside the window", p.x, p.y),
            ));
        }
        Ok(PointPattern { points, window })
    }

    pub(crate) fn from_trusted(window: Window, points: Vec<Point>) -> Self {
        debug_assert!(points.iter().all(|p| window.contains(*p)));
        PointPattern { points, window }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Point> {
        self.points.iter()
    }

    /// Points whose index satisfies `keep`.
    pub(crate) fn select(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        let points = self
            .points
            .iter()
            .enumerate()
            .filter_map(|(i, p)| keep(i).then_some(*p))
            .collect();
        PointPattern::from_trusted(self.window, points)
    }

    /// Smallest pairwise toroidal distance, `None` for fewer than two points.
    pub fn min_pairwise_distance(&self) -> Option<f64> {
        min_distance_brute(&self.window, &self.points, None)
    }

    /// Smallest toroidal distance between a point here and one in `other`.
    pub fn min_cross_distance(&self, other: &PointPattern) -> Option<f64> {
        min_distance_brute(&self.window, &self.points, Some(&other.points))
    }
}

fn min_distance_brute(window: &Window, a: &[Point], b: Option<&[Point]>) -> Option<f64> {
    let mut best = f64::INFINITY;
    match b {
        None => {
            for (i, p) in a.iter().enumerate() {
                for q in &a[i + 1..] {
                    best = best.min(window.dist2(*p, *q));
                }
            }
        }
        Some(b) => {
            for p in a {
                for q in b {
                    best = best.min(window.dist2(*p, *q));
                }
            }
        }
    }
    best.is_finite().then(|| best.sqrt())
}

/// Uniform bucket grid over a toroidal window for fixed-radius queries.
///
/// Cells are at least `radius` wide, so every neighbour within `radius` lies
/// in the 3x3 block around the query cell.
#[derive(Debug, Clone)]
pub struct CellGrid<'a> {
    window: Window,
    points: &'a [Point],
    radius: f64,
    nx: usize,
    ny: usize,
    cell_w: f64,
    cell_h: f64,
    // bucket `c` holds indices order[start[c]..start[c + 1]]
    start: Vec<usize>,
    order: Vec<usize>,
}

impl<'a> CellGrid<'a> {
    pub fn new(window: Window, points: &'a [Point], radius: f64) -> Self {
        let cells_along = |side: f64| -> usize {
            if radius <= 0.0 {
                return 1;
            }
            ((side / radius).floor() as usize).clamp(1, 4096)
        };
        let nx = cells_along(window.width());
        let ny = cells_along(window.height());
        let cell_w = window.width() / nx as f64;
        let cell_h = window.height() / ny as f64;

        let mut grid = CellGrid {
            window,
            points,
            radius,
            nx,
            ny,
            cell_w,
            cell_h,
            start: vec![0; nx * ny + 1],
            order: vec![0; points.len()],
        };
        let cells: Vec<usize> = points.iter().map(|p| grid.cell_of(*p)).collect();
        for &c in &cells {
            grid.start[c + 1] += 1;
        }
        for c in 0..nx * ny {
            grid.start[c + 1] += grid.start[c];
        }
        let mut fill = grid.start.clone();
        for (i, &c) in cells.iter().enumerate() {
            grid.order[fill[c]] = i;
            fill[c] += 1;
        }
        grid
    }

    fn cell_coords(&self, p: Point) -> (usize, usize) {
        let cx = ((p.x / self.cell_w) as usize).min(self.nx - 1);
        let cy = ((p.y / self.cell_h) as usize).min(self.ny - 1);
        (cx, cy)
    }

    fn cell_of(&self, p: Point) -> usize {
        let (cx, cy) = self.cell_coords(p);
        cy * self.nx + cx
    }

    fn neighbour_range(n: usize, c: usize) -> ([usize; 3], usize) {
        match n {
            1 => ([0, 0, 0], 1),
            2 => ([0, 1, 0], 2),
            _ => ([(c + n - 1) % n, c, (c + 1) % n], 3),
        }
    }

    /// Calls `f(index, squared_distance)` for every point strictly closer
    /// than `radius` to `query`. `radius` must not exceed the grid radius.
    pub fn for_each_within(&self, query: Point, radius: f64, mut f: impl FnMut(usize, f64)) {
        debug_assert!(radius <= self.radius || self.nx == 1 && self.ny == 1);
        let r2 = radius * radius;
        let (cx, cy) = self.cell_coords(query);
        let (xs, nxs) = Self::neighbour_range(self.nx, cx);
        let (ys, nys) = Self::neighbour_range(self.ny, cy);
        for &gy in &ys[..nys] {
            for &gx in &xs[..nxs] {
                let c = gy * self.nx + gx;
                for &i in &self.order[self.start[c]..self.start[c + 1]] {
                    let d2 = self.window.dist2(query, self.points[i]);
                    if d2 < r2 {
                        f(i, d2);
                    }
                }
            }
        }
    }

    /// Whether any point other than `exclude` lies strictly within `radius`.
    pub fn any_within(&self, query: Point, radius: f64, exclude: Option<usize>) -> bool {
        let mut found = false;
        self.for_each_within(query, radius, |i, _| {
            if Some(i) != exclude {
                found = true;
            }
        });
        found
    }
}

//! Per-dimension complex-plane primitives.
//!
//! One complex coordinate of an embedding is a [`Point2`]. A relation acts on it
//! by an orthogonal projection onto an axis rotated by `theta_p`, followed by a
//! rotation by `theta_r`. The projection matrix is `Sᵀ · diag(a, b) · S` with
//! `S` the rotation by `theta_p`; since `S` is orthonormal no inversion is ever
//! performed and the matrix is symmetric.

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;

    fn sub(self, other: Point2) -> Point2 {
        Point2::new(self.x - other.x, self.y - other.y)
    }
}

/// Diagonal relaxation `(a, b)` and axis phase of one projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionSpec {
    pub a: f64,
    pub b: f64,
    pub theta_p: f64,
}

impl ProjectionSpec {
    pub const IDENTITY: ProjectionSpec = ProjectionSpec {
        a: 1.0,
        b: 1.0,
        theta_p: 0.0,
    };

    pub const fn new(a: f64, b: f64, theta_p: f64) -> Self {
        Self { a, b, theta_p }
    }

    /// Identity path: both diagonal entries are exactly one.
    pub fn is_identity(&self) -> bool {
        self.a == 1.0 && self.b == 1.0
    }

    /// Whether `(a, b)` is within `tol` of `(1, 0)` or `(0, 1)`.
    pub fn is_nontrivial(&self, tol: f64) -> bool {
        let near = |v: f64, target: f64| (v - target).abs() <= tol;
        (near(self.a, 1.0) && near(self.b, 0.0)) || (near(self.a, 0.0) && near(self.b, 1.0))
    }
}

/// Symmetric 2×2 projection matrix stored as its three distinct entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projector {
    pub m11: f64,
    pub m12: f64,
    pub m22: f64,
}

impl Projector {
    pub const IDENTITY: Projector = Projector {
        m11: 1.0,
        m12: 0.0,
        m22: 1.0,
    };

    pub fn new(spec: &ProjectionSpec) -> Self {
        if spec.is_identity() {
            return Self::IDENTITY;
        }
        let (s, c) = spec.theta_p.sin_cos();
        Self::from_parts(spec.a, spec.b, c, s)
    }

    /// Builds the matrix from `a`, `b` and a precomputed `cos θp`, `sin θp`.
    #[inline]
    pub fn from_parts(a: f64, b: f64, cos_p: f64, sin_p: f64) -> Self {
        if a == 1.0 && b == 1.0 {
            return Self::IDENTITY;
        }
        let cc = cos_p * cos_p;
        let ss = sin_p * sin_p;
        Projector {
            m11: a * cc + b * ss,
            m12: (b - a) * sin_p * cos_p,
            m22: a * ss + b * cc,
        }
    }

    #[inline]
    pub fn apply(&self, p: Point2) -> Point2 {
        Point2::new(
            self.m11 * p.x + self.m12 * p.y,
            self.m12 * p.x + self.m22 * p.y,
        )
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.m11, self.m12], [self.m12, self.m22]]
    }
}

/// Rotates `p` counter-clockwise by `theta` radians.
pub fn rotate(p: Point2, theta: f64) -> Point2 {
    let (s, c) = theta.sin_cos();
    rotate_cs(p, c, s)
}

/// Rotation with a precomputed cosine and sine.
#[inline]
pub fn rotate_cs(p: Point2, cos: f64, sin: f64) -> Point2 {
    Point2::new(p.x * cos - p.y * sin, p.x * sin + p.y * cos)
}

/// Explicit entries of `Sᵀ · diag(a, b) · S`.
pub fn projection_matrix(spec: &ProjectionSpec) -> [[f64; 2]; 2] {
    Projector::new(spec).matrix()
}

/// Projects `p` with the matrix defined by `spec`. Exact when `a = b = 1`.
pub fn project(p: Point2, spec: &ProjectionSpec) -> Point2 {
    if spec.is_identity() {
        return p;
    }
    Projector::new(spec).apply(p)
}

/// Signed coordinate of `p` along the projection axis: `cos θp·x − sin θp·y`.
///
/// All points sharing this value project to the same point under `(a, b) = (1, 0)`.
pub fn axis_coordinate(p: Point2, theta_p: f64) -> f64 {
    let (s, c) = theta_p.sin_cos();
    c * p.x - s * p.y
}

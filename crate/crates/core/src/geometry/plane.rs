use super::{is_unit_norm_sq, GeometryError, UnitQuaternion, Vec3};

/// Slicing plane `a·x + b·y + c·z = d` with a unit-length normal `(a, b, c)`.
///
/// Points with non-negative [`signed_distance`] lie on the kept side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneEquation {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Default for PlaneEquation {
    /// Normal `+z`, offset far below any model (one metre in millimetre
    /// units), so a fresh session shows the whole mesh.
    fn default() -> Self {
        PlaneEquation {
            a: 0.0,
            b: 0.0,
            c: 1.0,
            d: -1000.0,
        }
    }
}

impl PlaneEquation {
    /// Builds a plane, dividing all four coefficients by `‖(a, b, c)‖`.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, GeometryError> {
        if !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let n2 = a * a + b * b + c * c;
        if n2 == 0.0 || !n2.is_finite() {
            return Err(GeometryError::ZeroNormal);
        }
        if is_unit_norm_sq(n2) {
            return Ok(PlaneEquation { a, b, c, d });
        }
        let inv = 1.0 / n2.sqrt();
        let p = PlaneEquation {
            a: a * inv,
            b: b * inv,
            c: c * inv,
            d: d * inv,
        };
        if p.d.is_finite() {
            Ok(p)
        } else {
            Err(GeometryError::NonFinite)
        }
    }

    pub fn from_array(p: [f64; 4]) -> Result<Self, GeometryError> {
        Self::new(p[0], p[1], p[2], p[3])
    }

    /// Plane through `point` with the given normal direction.
    pub fn through_point(normal: Vec3, point: Vec3) -> Result<Self, GeometryError> {
        let n = super::UnitVec3::new(normal)?.get();
        Self::new(n.x, n.y, n.z, n.dot(point))
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn normal(&self) -> Vec3 {
        Vec3::new(self.a, self.b, self.c)
    }

    /// Coefficients in `[a, b, c, d]` order.
    pub fn to_array(self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Moves the plane along its normal by `dd` length units.
    pub fn offset(self, dd: f64) -> Result<Self, GeometryError> {
        let d = self.d + dd;
        if !d.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        Ok(PlaneEquation { d, ..self })
    }

    pub fn max_abs_diff(&self, o: &PlaneEquation) -> f64 {
        self.to_array()
            .iter()
            .zip(o.to_array())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// Rotates a plane by `q`.
///
/// The rotation matrix of `q` is augmented to 4×4 with a one in the last
/// diagonal slot and multiplied with the coefficient vector `(a, b, c, d)`.
/// A point `x` lies on `p` iff `q·x` lies on the result.
pub fn transform_plane(p: PlaneEquation, q: UnitQuaternion) -> PlaneEquation {
    let m = q.to_matrix().augment();
    let [a, b, c, d] = m.mul_vec4(p.to_array());
    // A rotation preserves the normal's length, so this only rescales by
    // rounding error and cannot fail for a valid input plane.
    PlaneEquation::new(a, b, c, d).unwrap_or(p)
}

/// `a·x + b·y + c·z − d`: positive on the normal side, magnitude equal to the
/// euclidean distance.
pub fn signed_distance(p: &PlaneEquation, point: Vec3) -> f64 {
    p.a * point.x + p.b * point.y + p.c * point.z - p.d
}

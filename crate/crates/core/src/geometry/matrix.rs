use super::Vec3;

/// Row-major 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3 {
    pub m: [f64; 9],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        m: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
    };

    pub fn from_rows(r: [[f64; 3]; 3]) -> Self {
        Mat3 {
            m: [
                r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2],
            ],
        }
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.m[row * 3 + col]
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        let m = &self.m;
        Vec3::new(
            m[0] * v.x + m[1] * v.y + m[2] * v.z,
            m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z,
        )
    }

    pub fn mul(&self, o: &Mat3) -> Mat3 {
        let mut out = [0.0; 9];
        for r in 0..3 {
            for c in 0..3 {
                out[r * 3 + c] = (0..3).map(|k| self.at(r, k) * o.at(k, c)).sum();
            }
        }
        Mat3 { m: out }
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.m;
        Mat3 {
            m: [m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]],
        }
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.m;
        m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6])
    }

    pub fn max_abs_diff(&self, o: &Mat3) -> f64 {
        self.m.iter().zip(&o.m).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Embeds this matrix into a 4×4 by adding a one on the diagonal:
    /// `[[self, 0], [0, 1]]`.
    pub fn augment(&self) -> Mat4 {
        let mut out = [0.0; 16];
        for r in 0..3 {
            for c in 0..3 {
                out[r * 4 + c] = self.at(r, c);
            }
        }
        out[15] = 1.0;
        Mat4 { m: out }
    }
}

/// Row-major 4×4 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4 {
    pub m: [f64; 16],
}

impl Mat4 {
    pub const IDENTITY: Mat4 = Mat4 {
        m: [
            1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0,
        ],
    };

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.m[row * 4 + col]
    }

    pub fn mul_vec4(&self, v: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (r, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|c| self.at(r, c) * v[c]).sum();
        }
        out
    }

    /// Homogeneous transform `translation · rotation · uniform scale`.
    pub fn from_trs(translation: Vec3, rotation: &Mat3, scale: f64) -> Mat4 {
        let mut m = rotation.augment().m;
        for r in 0..3 {
            for c in 0..3 {
                m[r * 4 + c] *= scale;
            }
        }
        m[3] = translation.x;
        m[7] = translation.y;
        m[11] = translation.z;
        Mat4 { m }
    }
}

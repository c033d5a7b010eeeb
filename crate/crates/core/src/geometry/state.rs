use super::{transform_plane, GeometryError, Mat4, PlaneEquation, UnitQuaternion, UnitVec3, Vec3};

/// Inclusive bounds applied to the model scale after every scale gesture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleLimits {
    min: f64,
    max: f64,
}

impl Default for ScaleLimits {
    fn default() -> Self {
        ScaleLimits { min: 0.05, max: 20.0 }
    }
}

impl ScaleLimits {
    pub fn new(min: f64, max: f64) -> Result<Self, GeometryError> {
        if !(min.is_finite() && max.is_finite() && min > 0.0 && min <= max) {
            return Err(GeometryError::InvalidScaleLimits { min, max });
        }
        Ok(ScaleLimits { min, max })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn clamp(&self, s: f64) -> f64 {
        s.clamp(self.min, self.max)
    }
}

/// A strictly positive, finite multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleFactor(f64);

impl ScaleFactor {
    pub fn new(f: f64) -> Result<Self, GeometryError> {
        if f.is_finite() && f > 0.0 {
            Ok(ScaleFactor(f))
        } else {
            Err(GeometryError::InvalidScaleFactor(f))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// One gesture's worth of change to the shared model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GestureDelta {
    /// Pan: world-frame rotation pre-multiplied onto the orientation.
    Rotation {
        dq: UnitQuaternion,
    },
    /// Pinch: multiplies the scale.
    Scale {
        factor: ScaleFactor,
    },
    /// Two-finger twist about the sender's camera view axis.
    Twist {
        angle: f64,
        axis: UnitVec3,
    },
    PlaneRotate {
        dq: UnitQuaternion,
    },
    /// Moves the slicing plane along its own normal.
    PlaneOffset {
        dd: f64,
    },
}

/// The shared, replicated model transform plus slicing plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelState {
    pub orientation: UnitQuaternion,
    scale: f64,
    pub anchor: Vec3,
    pub plane: PlaneEquation,
}

impl Default for ModelState {
    fn default() -> Self {
        ModelState {
            orientation: UnitQuaternion::IDENTITY,
            scale: 1.0,
            anchor: Vec3::ZERO,
            plane: PlaneEquation::default(),
        }
    }
}

impl ModelState {
    pub fn new(
        orientation: UnitQuaternion,
        scale: f64,
        anchor: Vec3,
        plane: PlaneEquation,
        limits: &ScaleLimits,
    ) -> Result<Self, GeometryError> {
        let scale = limits.clamp(ScaleFactor::new(scale)?.get());
        if !anchor.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        Ok(ModelState {
            orientation,
            scale,
            anchor,
            plane,
        })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Sets the scale, clamped into `limits`.
    pub fn set_scale(&mut self, s: ScaleFactor, limits: &ScaleLimits) {
        self.scale = limits.clamp(s.get());
    }

    /// Full model-to-world transform `T(anchor) · R(orientation) · S(scale)`.
    /// This is what a whole-matrix sync would have to ship per gesture.
    pub fn transform_matrix(&self) -> Mat4 {
        Mat4::from_trs(self.anchor, &self.orientation.to_matrix(), self.scale)
    }

    /// Largest componentwise difference over every field. Orientations are
    /// compared directly, not up to sign.
    pub fn max_abs_diff(&self, o: &ModelState) -> f64 {
        let q = self
            .orientation
            .to_array()
            .iter()
            .zip(o.orientation.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        q.max((self.scale - o.scale).abs())
            .max(self.anchor.max_abs_diff(o.anchor))
            .max(self.plane.max_abs_diff(&o.plane))
    }

    /// Returns the state after `delta`; `self` is left untouched.
    pub fn apply(&self, delta: &GestureDelta, limits: &ScaleLimits) -> ModelState {
        let mut next = *self;
        match *delta {
            GestureDelta::Rotation { dq } => next.orientation = dq.compose(self.orientation),
            GestureDelta::Scale { factor } => {
                next.scale = limits.clamp(factor.get() * self.scale);
            }
            GestureDelta::Twist { angle, axis } => {
                let dq = UnitQuaternion::from_axis_angle(axis, angle);
                next.orientation = dq.compose(self.orientation);
            }
            GestureDelta::PlaneRotate { dq } => next.plane = transform_plane(self.plane, dq),
            GestureDelta::PlaneOffset { dd } => {
                if let Ok(p) = self.plane.offset(dd) {
                    next.plane = p;
                }
            }
        }
        next
    }
}

/// [`ModelState::apply`] with the default scale limits.
pub fn apply_gesture_delta(state: &ModelState, delta: &GestureDelta) -> ModelState {
    state.apply(delta, &ScaleLimits::default())
}

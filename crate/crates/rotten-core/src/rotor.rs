//! Unit quaternion rotors and Bloch vectors.
//!
//! A rotation by angle `a` about a unit axis `n` is stored as the quaternion
//! `(cos(a/2), sin(a/2) n)`. Under the convention `U = exp(-i a sigma.n / 2)`
//! this quaternion corresponds to the SU(2) matrix
//! `w I - i (x sigma_x + y sigma_y + z sigma_z)`, and since the map sends
//! quaternion multiplication to matrix multiplication in the same order, the
//! quaternion route and the 2x2 complex-matrix route can be checked against
//! each other entry by entry.
//!
//! The quaternions `q` and `-q` describe the same physical rotation (they
//! differ by an unobservable global phase of the propagator), so rotor
//! comparisons go through [`Rotation::distance_up_to_phase`], which is blind
//! to that sign.

use num_complex::Complex64;
use thiserror::Error;

/// Input whose norm is too far from 1 to be accepted as a unit axis or rotor.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("norm {norm} differs from 1 by more than 1e-9")]
pub struct NormalizationError {
    pub norm: f64,
}

/// Magnetization direction; unit length for pure states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    /// Unit vector along +x.
    pub const X: BlochVector = BlochVector { x: 1.0, y: 0.0, z: 0.0 };
    /// Unit vector along +y.
    pub const Y: BlochVector = BlochVector { x: 0.0, y: 1.0, z: 0.0 };
    /// Unit vector along +z (thermal equilibrium).
    pub const Z: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 1.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }
}

/// Rotation stored as a unit quaternion `(w, x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl Rotation {
    pub fn identity() -> Self {
        Rotation { w: 1.0, x: 0.0, y: 0.0, z: 0.0 }
    }

    /// Rotation by `angle` about `axis`, which must be unit within 1e-9.
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Result<Self, NormalizationError> {
        let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(NormalizationError { norm });
        }
        Ok(Self::from_unit_axis_angle(axis, angle))
    }

    /// Same as `from_axis_angle` for an axis already known to be unit.
    pub(crate) fn from_unit_axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let (s, w) = (angle / 2.0).sin_cos();
        Rotation { w, x: s * axis[0], y: s * axis[1], z: s * axis[2] }.normalized()
    }

    /// Builds from raw components, normalizing; the norm must be unit within 1e-9.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Result<Self, NormalizationError> {
        let q = Rotation { w, x, y, z };
        let norm = q.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(NormalizationError { norm });
        }
        Ok(q.normalized())
    }

    /// Components as `[w, x, y, z]`.
    pub fn quaternion(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    /// Rotation angle in `[0, 2 pi]` recovered from the quaternion.
    pub fn angle(&self) -> f64 {
        2.0 * self.vector_norm().atan2(self.w)
    }

    /// Rotation axis, or `None` for an (anti-)identity rotor.
    pub fn axis(&self) -> Option<[f64; 3]> {
        let v = self.vector_norm();
        if v < 1e-12 {
            return None;
        }
        Some([self.x / v, self.y / v, self.z / v])
    }

    fn vector_norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    fn normalized(self) -> Self {
        let n = self.norm();
        Rotation { w: self.w / n, x: self.x / n, y: self.y / n, z: self.z / n }
    }

    /// Composition `second o first` (first rotation applied first), i.e. the
    /// quaternion product `second * first`, renormalized.
    pub fn compose(second: Rotation, first: Rotation) -> Rotation {
        let (a, b) = (second, first);
        Rotation {
            w: a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            x: a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            y: a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            z: a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        }
        .normalized()
    }

    /// Inverse rotation (conjugate quaternion).
    pub fn inverse(&self) -> Rotation {
        Rotation { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    /// Same rotation with flipped global phase (`q -> -q`).
    pub fn negated(&self) -> Rotation {
        Rotation { w: -self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    /// Rotates a Bloch vector.
    pub fn apply(&self, v: BlochVector) -> BlochVector {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        BlochVector {
            x: (1.0 - 2.0 * (y * y + z * z)) * v.x
                + 2.0 * (x * y - w * z) * v.y
                + 2.0 * (x * z + w * y) * v.z,
            y: 2.0 * (x * y + w * z) * v.x
                + (1.0 - 2.0 * (x * x + z * z)) * v.y
                + 2.0 * (y * z - w * x) * v.z,
            z: 2.0 * (x * z - w * y) * v.x
                + 2.0 * (y * z + w * x) * v.y
                + (1.0 - 2.0 * (x * x + y * y)) * v.z,
        }
    }

    /// Global-phase-invariant distance `1 - |<a, b>|`, zero iff the rotors
    /// describe the same physical rotation; equals `1 - |Tr(B^dag A)| / 2` on
    /// the SU(2) side.
    pub fn distance_up_to_phase(&self, other: &Rotation) -> f64 {
        let dot =
            self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z;
        (1.0 - dot.abs()).max(0.0)
    }

    /// The SU(2) matrix `w I - i (x sigma_x + y sigma_y + z sigma_z)`.
    pub fn to_su2(&self) -> [[Complex64; 2]; 2] {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        [
            [Complex64::new(w, -z), Complex64::new(-y, -x)],
            [Complex64::new(y, -x), Complex64::new(w, z)],
        ]
    }
}

impl std::ops::Mul for Rotation {
    type Output = Rotation;

    /// `a * b` applies `b` first, matching operator-product notation.
    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation::compose(self, rhs)
    }
}

//! Vector algebra, local frames and spatial frequencies.
//!
//! A [`Frame3`] places a surface (or a base station) in the world: the local
//! x/y axes lie on the surface, z is the outward normal. Points are mapped into
//! a frame by translating to its origin and projecting onto the axes.

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const AXIS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Pose of a surface or antenna array: origin plus right-handed orthonormal axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFrame", into = "RawFrame")]
pub struct Frame3 {
    origin: Vec3,
    axis_x: Vec3,
    axis_y: Vec3,
    axis_z: Vec3,
}

#[derive(Serialize, Deserialize)]
struct RawFrame {
    origin: Vec3,
    axis_x: Vec3,
    axis_y: Vec3,
    axis_z: Vec3,
}

impl TryFrom<RawFrame> for Frame3 {
    type Error = Error;
    fn try_from(r: RawFrame) -> Result<Self> {
        Frame3::new(r.origin, r.axis_x, r.axis_y, r.axis_z)
    }
}

impl From<Frame3> for RawFrame {
    fn from(f: Frame3) -> Self {
        RawFrame { origin: f.origin, axis_x: f.axis_x, axis_y: f.axis_y, axis_z: f.axis_z }
    }
}

impl Frame3 {
    /// Builds a frame after checking unit norms, orthogonality and handedness.
    pub fn new(origin: Vec3, axis_x: Vec3, axis_y: Vec3, axis_z: Vec3) -> Result<Self> {
        if !(origin.is_finite() && axis_x.is_finite() && axis_y.is_finite() && axis_z.is_finite()) {
            return Err(Error::InvalidFrame("non-finite component".into()));
        }
        for (name, a) in [("x", axis_x), ("y", axis_y), ("z", axis_z)] {
            if (a.norm() - 1.0).abs() > AXIS_TOL {
                return Err(Error::InvalidFrame(format!("axis {name} is not unit norm")));
            }
        }
        if axis_x.dot(axis_y).abs() > AXIS_TOL
            || axis_x.dot(axis_z).abs() > AXIS_TOL
            || axis_y.dot(axis_z).abs() > AXIS_TOL
        {
            return Err(Error::InvalidFrame("axes are not orthogonal".into()));
        }
        if (axis_x.cross(axis_y) - axis_z).norm() > AXIS_TOL {
            return Err(Error::InvalidFrame("axes are not right-handed".into()));
        }
        Ok(Self { origin, axis_x, axis_y, axis_z })
    }

    pub fn identity_at(origin: Vec3) -> Self {
        Self { origin, axis_x: Vec3::X, axis_y: Vec3::Y, axis_z: Vec3::Z }
    }

    /// Frame whose normal (z) points along `normal`, with a horizontal x axis
    /// and y completing the right-handed triple. For a vertical normal the
    /// world x axis is used as the horizontal reference.
    pub fn facing(origin: Vec3, normal: Vec3) -> Result<Self> {
        let z = normal.normalized().ok_or_else(|| Error::InvalidFrame("zero normal".into()))?;
        let x = match Vec3::Z.cross(z).normalized() {
            Some(x) if Vec3::Z.cross(z).norm() > 1e-12 => x,
            _ => z.cross(Vec3::X).cross(z).normalized().unwrap_or(Vec3::Y),
        };
        let y = z.cross(x);
        Frame3::new(origin, x, y, z)
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }
    pub fn axis_x(&self) -> Vec3 {
        self.axis_x
    }
    pub fn axis_y(&self) -> Vec3 {
        self.axis_y
    }
    pub fn axis_z(&self) -> Vec3 {
        self.axis_z
    }

    /// Coordinates of `p` in this frame.
    pub fn to_local(&self, p: Vec3) -> Vec3 {
        let d = p - self.origin;
        Vec3::new(d.dot(self.axis_x), d.dot(self.axis_y), d.dot(self.axis_z))
    }

    /// Inverse of [`Frame3::to_local`].
    pub fn to_world(&self, l: Vec3) -> Vec3 {
        self.origin + self.axis_x * l.x + self.axis_y * l.y + self.axis_z * l.z
    }

    /// Direction cosines (Omega, Psi) of `p` along the local x and y axes.
    pub fn spatial_frequencies(&self, p: Vec3) -> Result<(f64, f64)> {
        let l = self.to_local(p);
        let r = l.norm();
        if r == 0.0 {
            return Err(Error::CoincidentPoint);
        }
        Ok((l.x / r, l.y / r))
    }

    /// True when `p` lies on the radiating side of the surface (boundary included).
    pub fn fronting(&self, p: Vec3) -> bool {
        self.axis_z.dot(p - self.origin) >= 0.0
    }
}

pub fn to_local(frame: &Frame3, p: Vec3) -> Vec3 {
    frame.to_local(p)
}

pub fn spatial_frequencies(frame: &Frame3, p: Vec3) -> Result<(f64, f64)> {
    frame.spatial_frequencies(p)
}

pub fn fronting(frame: &Frame3, p: Vec3) -> bool {
    frame.fronting(p)
}

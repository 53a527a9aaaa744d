//! Small fixed-size vector/matrix helpers. Points in patch coordinates are
//! `[f64; 2]` (second slot unused when the base dimension is 1); ambient
//! points and directions are `[f64; 3]` with the same convention.

pub type Vec3 = [f64; 3];
/// Row-major 3x3 matrix; rotations for 2D bodies embed as the upper-left
/// block with a unit third row/column.
pub type Mat3 = [[f64; 3]; 3];

pub fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

pub fn scale3(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn add3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn cross3(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn mat_vec(m: &Mat3, v: Vec3) -> Vec3 {
    [dot3(m[0], v), dot3(m[1], v), dot3(m[2], v)]
}

/// Apply the transpose (inverse, for rotations) of `m`.
pub fn mat_tvec(m: &Mat3, v: Vec3) -> Vec3 {
    [
        m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
        m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
        m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
    ]
}

/// Rotation with the given columns (an orthonormal frame).
pub fn mat_from_columns(c0: Vec3, c1: Vec3, c2: Vec3) -> Mat3 {
    [
        [c0[0], c1[0], c2[0]],
        [c0[1], c1[1], c2[1]],
        [c0[2], c1[2], c2[2]],
    ]
}

/// Orthonormal frame (e_u, e_w) completing a unit vector `n` in 3D, chosen
/// deterministically.
pub fn tangent_frame(n: Vec3) -> (Vec3, Vec3) {
    let seed = if n[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let mut u = sub3(seed, scale3(n, dot3(seed, n)));
    let nu = norm3(u);
    u = scale3(u, 1.0 / nu);
    let w = cross3(n, u);
    (u, w)
}

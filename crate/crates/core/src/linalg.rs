//! Fixed-size 3×3 helpers. Nothing here allocates.

pub(crate) type Vec3 = [f64; 3];
pub(crate) type Mat3 = [[f64; 3]; 3];

pub(crate) const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

#[inline]
pub(crate) fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub(crate) fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub(crate) fn mat_scale(a: &Mat3, k: f64) -> Mat3 {
    let mut out = *a;
    out.iter_mut().flatten().for_each(|x| *x *= k);
    out
}

pub(crate) fn mat_add(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = *a;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] += b[i][j];
        }
    }
    out
}

/// Maximum absolute column sum.
pub(crate) fn norm1(a: &Mat3) -> f64 {
    (0..3)
        .map(|j| a[0][j].abs() + a[1][j].abs() + a[2][j].abs())
        .fold(0.0, f64::max)
}

#[inline]
pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub(crate) fn expm(a: &Mat3) -> Mat3 {
    let norm = norm1(a);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let scaled = mat_scale(a, scale);
    // ||scaled|| <= 1/2, so 20 terms put the truncation error below 2^-80.
    let mut term = IDENTITY;
    let mut sum = IDENTITY;
    for k in 1..=20 {
        term = mat_scale(&mat_mul(&term, &scaled), 1.0 / k as f64);
        sum = mat_add(&sum, &term);
    }
    for _ in 0..squarings {
        sum = mat_mul(&sum, &sum);
    }
    sum
}

/// Angle between two lines through the origin (sign-insensitive), radians.
pub(crate) fn line_angle(a: &Vec3, b: &Vec3) -> f64 {
    let na = libm::sqrt(dot(a, a));
    let nb = libm::sqrt(dot(b, b));
    let cos = (dot(a, b) / (na * nb)).abs().min(1.0);
    // acos loses precision near 1; use the cross product norm instead.
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let sin = libm::sqrt(dot(&cross, &cross)) / (na * nb);
    libm::atan2(sin, cos)
}

//! Unions of intervals on the line.

/// `(V_0, V_1)` of a union of closed intervals: component count and total length.
pub fn union_volumes(intervals: &[(f64, f64)]) -> [f64; 2] {
    if intervals.is_empty() {
        return [0.0, 0.0];
    }
    let mut iv: Vec<(f64, f64)> = intervals.to_vec();
    iv.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut count = 0.0;
    let mut length = 0.0;
    let (mut lo, mut hi) = iv[0];
    for &(a, b) in &iv[1..] {
        if a <= hi {
            hi = hi.max(b);
        } else {
            count += 1.0;
            length += hi - lo;
            lo = a;
            hi = b;
        }
    }
    [count + 1.0, length + (hi - lo)]
}

/// `(V_0, V_1)` of `∪ [c_i - r, c_i + r]`.
pub fn intrinsic_volumes_1d(centres: &[f64], r: f64) -> [f64; 2] {
    let iv: Vec<(f64, f64)> = centres.iter().map(|c| (c - r, c + r)).collect();
    union_volumes(&iv)
}

//! Schoolbook coefficient arithmetic on little-endian slices. Results are not trimmed.

pub(crate) fn add(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut out = long.to_vec();
    for (o, &s) in out.iter_mut().zip(short) {
        *o = (*o + s) % p;
    }
    out
}

pub(crate) fn sub(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = a.to_vec();
    if out.len() < b.len() {
        out.resize(b.len(), 0);
    }
    for (o, &s) in out.iter_mut().zip(b) {
        *o = (*o + p - s) % p;
    }
    out
}

pub(crate) fn mul(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let p = p as u64;
    let mut acc = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            acc[i + j] += x as u64 * y as u64;
        }
        // Keep the accumulator far from overflow for large p.
        if p > 1 << 16 {
            for v in acc.iter_mut() {
                *v %= p;
            }
        }
    }
    acc.into_iter().map(|v| (v % p) as u32).collect()
}

/// Reduces `r` modulo the nonzero divisor `d` in place and truncates to `deg d` coefficients.
pub(crate) fn rem_in_place(p: u32, r: &mut Vec<u32>, d: &[u32]) {
    let dn = trimmed_len(d);
    assert!(dn > 0, "division by zero polynomial");
    let d = &d[..dn];
    let lead_inv = inv(p, d[dn - 1]) as u64;
    let p64 = p as u64;
    let mut n = trimmed_len(r);
    while n >= dn {
        let c = (r[n - 1] as u64 * lead_inv) % p64;
        if c != 0 {
            let shift = n - dn;
            let neg = p64 - c;
            for (k, &dk) in d.iter().enumerate() {
                let v = r[shift + k] as u64 + neg * dk as u64;
                r[shift + k] = (v % p64) as u32;
            }
        }
        n -= 1;
        n = trimmed_len(&r[..n]);
    }
    r.truncate(n);
}

pub(crate) fn divrem(p: u32, a: &[u32], d: &[u32]) -> (Vec<u32>, Vec<u32>) {
    let dn = trimmed_len(d);
    assert!(dn > 0, "division by zero polynomial");
    let d = &d[..dn];
    let mut r = a[..trimmed_len(a)].to_vec();
    if r.len() < dn {
        return (Vec::new(), r);
    }
    let p64 = p as u64;
    let lead_inv = inv(p, d[dn - 1]) as u64;
    let mut q = vec![0u32; r.len() - dn + 1];
    for n in (dn..=r.len()).rev() {
        let c = (r[n - 1] as u64 * lead_inv) % p64;
        if c == 0 {
            continue;
        }
        let shift = n - dn;
        q[shift] = c as u32;
        let neg = p64 - c;
        for (k, &dk) in d.iter().enumerate() {
            let v = r[shift + k] as u64 + neg * dk as u64;
            r[shift + k] = (v % p64) as u32;
        }
    }
    r.truncate(dn - 1);
    (q, r)
}

#[inline]
pub(crate) fn trimmed_len(a: &[u32]) -> usize {
    let mut n = a.len();
    while n > 0 && a[n - 1] == 0 {
        n -= 1;
    }
    n
}

pub(crate) fn inv(p: u32, a: u32) -> u32 {
    let p64 = p as u64;
    let mut base = a as u64 % p64;
    let mut e = p64 - 2;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p64;
        }
        base = base * base % p64;
        e >>= 1;
    }
    acc as u32
}

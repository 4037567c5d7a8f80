//! Modular arithmetic and primality for residue constructions.

/// `base^exp mod m` by square-and-multiply.
pub fn mod_pow(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m128 = m as u128;
    let mut acc: u128 = 1;
    let mut b = base as u128 % m128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

/// Deterministic Miller-Rabin for all `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in BASES {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes `≤ limit` by the sieve of Eratosthenes.
pub fn primes_up_to(limit: usize) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut k = i * i;
        while k <= limit {
            composite[k] = true;
            k += i;
        }
    }
    out
}

/// `Some(r)` when `x = r²`.
pub fn exact_sqrt(x: u64) -> Option<u64> {
    let mut r = (x as f64).sqrt() as u64;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    (r * r == x).then_some(r)
}

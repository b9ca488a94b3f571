//! Small combinatorial helpers: binomials, colex subset ranking, set partitions.

use num_bigint::BigUint;
use num_traits::One;

/// Binomial coefficient as u64. Panics on overflow, which never happens at the
/// sizes this crate works with.
pub fn binom(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).expect("binomial overflow")
}

pub fn binom_big(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::default();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// All k-subsets of `0..n`, sorted ascending inside, listed in colex order.
pub fn subsets_colex(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binom(n, k) as usize);
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // colex successor: find the first position that can be bumped
        let mut i = 0;
        while i < k {
            let limit = if i + 1 < k { cur[i + 1] } else { n };
            if cur[i] + 1 < limit {
                break;
            }
            i += 1;
        }
        if i == k {
            break;
        }
        cur[i] += 1;
        for (j, slot) in cur.iter_mut().enumerate().take(i) {
            *slot = j;
        }
    }
    out
}

/// Colex rank of a sorted subset: sum of C(a_i, i+1).
pub fn colex_rank(sorted: &[usize]) -> usize {
    sorted.iter().enumerate().map(|(i, &a)| binom(a, i + 1) as usize).sum()
}

/// Inverse of [`colex_rank`].
pub fn colex_unrank(mut rank: usize, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    for i in (0..k).rev() {
        let mut a = i;
        while binom(a + 1, i + 1) as usize <= rank {
            a += 1;
        }
        out[i] = a;
        rank -= binom(a, i + 1) as usize;
    }
    out
}

/// Set partitions of `0..m` as restricted growth strings, in lexicographic order.
pub fn set_partitions(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut rgs = vec![0usize; m];
    fn rec(pos: usize, max: usize, rgs: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == rgs.len() {
            out.push(rgs.clone());
            return;
        }
        for v in 0..=max + 1 {
            rgs[pos] = v;
            rec(pos + 1, max.max(v), rgs, out);
        }
    }
    rgs[0] = 0;
    rec(1, 0, &mut rgs, &mut out);
    out
}

/// Number of blocks of a restricted growth string.
pub fn blocks(rgs: &[usize]) -> usize {
    rgs.iter().max().map_or(0, |m| m + 1)
}

/// All permutations of `0..m` in lexicographic order.
pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    (0..m).permutations(m).collect()
}

/// All tuples in `0..n` of the given length, lexicographic.
pub fn tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let total = n.pow(len as u32);
    (0..total)
        .map(|mut idx| {
            let mut t = vec![0; len];
            for slot in t.iter_mut().rev() {
                *slot = idx % n;
                idx /= n;
            }
            t
        })
        .collect()
}

/// Integer k-th root rounded up: the least t with t^k >= x.
pub fn ceil_root(x: &BigUint, k: u32) -> BigUint {
    if k == 1 {
        return x.clone();
    }
    let t = x.nth_root(k);
    if t.pow(k) < *x {
        t + 1u32
    } else {
        t
    }
}

/// Parse a decimal literal such as "0.17" or "1e-3" into an exact (numerator, denominator).
pub fn parse_decimal(s: &str) -> Option<(BigUint, BigUint)> {
    let s = s.trim();
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigUint = digits.parse().ok()?;
    let mut den = BigUint::from(10u32).pow(frac_part.len() as u32);
    if exp >= 0 {
        num *= BigUint::from(10u32).pow(exp as u32);
    } else {
        den *= BigUint::from(10u32).pow((-exp) as u32);
    }
    Some((num, den))
}

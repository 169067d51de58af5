use crate::numerics::digits;
use crate::{Error, Result};

/// Table-driven arithmetic in `GF(p^k)`.
///
/// Element `e` is the polynomial `sum_i c_i x^i` whose coefficients are the base-`p`
/// digits of `e` (least significant first), reduced modulo the lexicographically
/// first monic irreducible polynomial of degree `k`.
#[derive(Debug, Clone)]
pub struct GaloisField {
    p: usize,
    k: usize,
    q: usize,
    modulus: Vec<usize>,
    add: Vec<usize>,
    mul: Vec<usize>,
    trace: Vec<usize>,
}

impl GaloisField {
    pub fn new(p: usize, k: usize) -> Result<Self> {
        if p < 2 || !is_prime(p) || k == 0 {
            return Err(Error::InvalidParameter(format!("GF({p}^{k}) is not a field")));
        }
        let q = p.checked_pow(k as u32).filter(|&q| q <= 1 << 12).ok_or_else(|| {
            Error::InvalidParameter(format!("GF({p}^{k}) too large for table arithmetic"))
        })?;
        let modulus = first_irreducible(p, k);
        let elems: Vec<Vec<usize>> = (0..q).map(|e| digits(e, p, k)).collect();
        let index = |c: &[usize]| c.iter().rev().fold(0, |acc, &x| acc * p + x);

        let mut add = vec![0; q * q];
        let mut mul = vec![0; q * q];
        for a in 0..q {
            for b in 0..q {
                let s: Vec<usize> = elems[a].iter().zip(&elems[b]).map(|(x, y)| (x + y) % p).collect();
                add[a * q + b] = index(&s);
                mul[a * q + b] = index(&mul_mod(&elems[a], &elems[b], &modulus, p));
            }
        }
        let mut field = Self { p, k, q, modulus, add, mul, trace: vec![0; q] };
        for a in 0..q {
            // tr(a) = a + a^p + ... + a^(p^(k-1)); lands in the prime subfield
            let mut acc = 0;
            let mut frob = a;
            for _ in 0..k {
                acc = field.add(acc, frob);
                frob = field.pow(frob, p);
            }
            debug_assert!(acc < p);
            field.trace[a] = acc;
        }
        Ok(field)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> usize {
        self.q
    }

    /// Coefficients of the defining polynomial, constant term first.
    pub fn modulus(&self) -> &[usize] {
        &self.modulus
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.q + b]
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.q + b]
    }

    pub fn pow(&self, a: usize, mut e: usize) -> usize {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Absolute trace to `GF(p)`, returned as an integer in `0..p`.
    pub fn trace(&self, a: usize) -> usize {
        self.trace[a]
    }

    /// The element `x^i` for `i < k`.
    pub fn monomial(&self, i: usize) -> usize {
        assert!(i < self.k, "monomial degree {i} outside the polynomial basis");
        self.p.pow(i as u32)
    }
}

pub(crate) fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|i| i * i <= n).all(|i| !n.is_multiple_of(i))
}

fn trim(mut v: Vec<usize>) -> Vec<usize> {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
    v
}

/// Remainder of `a` modulo monic `m`, over `GF(p)`.
fn rem(a: &[usize], m: &[usize], p: usize) -> Vec<usize> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let c = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if c != 0 {
            for (i, &mi) in m.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p * p - c * mi % p) % p;
            }
        }
        r.pop();
    }
    r.resize(dm, 0);
    r
}

fn mul_mod(a: &[usize], b: &[usize], m: &[usize], p: usize) -> Vec<usize> {
    let mut prod = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    rem(&prod, m, p)
}

fn first_irreducible(p: usize, k: usize) -> Vec<usize> {
    if k == 1 {
        return vec![0, 1];
    }
    let count = p.pow(k as u32);
    for low in 0..count {
        let mut cand = digits(low, p, k);
        cand.push(1);
        if cand[0] == 0 {
            continue;
        }
        let reducible = (1..=k / 2).any(|deg| {
            (0..p.pow(deg as u32)).any(|f| {
                let mut factor = digits(f, p, deg);
                factor.push(1);
                trim(rem(&cand, &factor, p)).iter().all(|&c| c == 0)
            })
        });
        if !reducible {
            return cand;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists")
}

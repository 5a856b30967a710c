//! Fixed-width multi-limb integers stored back to back in one `Vec<u64>`.
//!
//! A grid holds `cells` numbers of `stride` little-endian limbs each. Kernels
//! only touch the first `active` limbs of every cell; callers guarantee that
//! the values fit. Signed values use two's complement at the active width.

use num_bigint::{BigInt, BigUint, Sign};

pub(crate) fn limbs_for_bits(bits: u64) -> usize {
    (bits as usize).div_ceil(64).max(1)
}

/// `dst += src`, carrying into the rest of `dst`. Returns the carry out of `dst`.
#[inline]
pub(crate) fn add_assign(dst: &mut [u64], src: &[u64]) -> bool {
    let (lo, hi) = dst.split_at_mut(src.len());
    let mut carry = false;
    for (d, &s) in lo.iter_mut().zip(src) {
        let (a, c1) = d.overflowing_add(s);
        let (b, c2) = a.overflowing_add(carry as u64);
        *d = b;
        carry = c1 | c2;
    }
    if carry {
        for d in hi {
            let (v, c) = d.overflowing_add(1);
            *d = v;
            if !c {
                return false;
            }
        }
        return true;
    }
    false
}

/// Adds `value * 2^shift` to a two's complement number, wrapping at `dst.len()` limbs.
#[inline]
pub(crate) fn add_small_shifted(dst: &mut [u64], value: i64, shift: u64) {
    if value == 0 {
        return;
    }
    let q = (shift / 64) as usize;
    let r = shift % 64;
    let mag = value.unsigned_abs() as u128;
    let wide = mag << r;
    let parts = [wide as u64, (wide >> 64) as u64];
    if value > 0 {
        let mut carry = 0u64;
        for i in q..dst.len() {
            let p = if i - q < 2 { parts[i - q] } else { 0 };
            if p == 0 && carry == 0 && i - q >= 2 {
                break;
            }
            let (a, c1) = dst[i].overflowing_add(p);
            let (b, c2) = a.overflowing_add(carry);
            dst[i] = b;
            carry = (c1 | c2) as u64;
        }
    } else {
        let mut borrow = 0u64;
        for i in q..dst.len() {
            let p = if i - q < 2 { parts[i - q] } else { 0 };
            if p == 0 && borrow == 0 && i - q >= 2 {
                break;
            }
            let (a, b1) = dst[i].overflowing_sub(p);
            let (b, b2) = a.overflowing_sub(borrow);
            dst[i] = b;
            borrow = (b1 | b2) as u64;
        }
    }
}

#[inline]
pub(crate) fn is_negative(x: &[u64]) -> bool {
    x.last().is_some_and(|&top| (top >> 63) == 1)
}

/// Signed comparison of two's complement numbers of equal width.
pub(crate) fn cmp_signed(a: &[u64], b: &[u64]) -> std::cmp::Ordering {
    let n = a.len();
    debug_assert_eq!(n, b.len());
    let ta = a[n - 1] as i64;
    let tb = b[n - 1] as i64;
    if ta != tb {
        return ta.cmp(&tb);
    }
    for i in (0..n - 1).rev() {
        if a[i] != b[i] {
            return a[i].cmp(&b[i]);
        }
    }
    std::cmp::Ordering::Equal
}

pub(crate) fn biguint_from_limbs(x: &[u64]) -> BigUint {
    let mut digits = Vec::with_capacity(x.len() * 2);
    for &l in x {
        digits.push(l as u32);
        digits.push((l >> 32) as u32);
    }
    BigUint::new(digits)
}

pub(crate) fn bigint_from_signed_limbs(x: &[u64]) -> BigInt {
    if is_negative(x) {
        let mut neg: Vec<u64> = x.iter().map(|l| !l).collect();
        add_small_shifted(&mut neg, 1, 0);
        BigInt::from_biguint(Sign::Minus, biguint_from_limbs(&neg))
    } else {
        BigInt::from_biguint(Sign::Plus, biguint_from_limbs(x))
    }
}

/// Writes `v` into `dst`, failing if it needs more limbs than `dst` has.
pub(crate) fn write_biguint(dst: &mut [u64], v: &BigUint) -> bool {
    let digits = v.to_u64_digits();
    if digits.len() > dst.len() {
        return false;
    }
    dst.fill(0);
    dst[..digits.len()].copy_from_slice(&digits);
    true
}

/// One liar-machine step over cells of a single parity class.
///
/// Cell `i` of `src` sits at site `origin + 2i`; cell `i` of the output sits at
/// `origin - 1 + 2i`, so output cell `i` receives from source cells `i - 1`
/// (moving right) and `i` (moving left). Every odd cell splits evenly and
/// sends its leftover chip right when its sign is +1 and left when it is -1,
/// with signs alternating over odd cells from the left.
///
/// `chi` receives the sign of every source cell. Only the first `out_cells`
/// output cells are produced (at most `cells + 1`).
#[allow(clippy::needless_range_loop)]
pub(crate) fn liar_step(
    src: &[u64],
    cells: usize,
    stride: usize,
    active: usize,
    dst: &mut Vec<u64>,
    out_cells: usize,
    chi: &mut Vec<i8>,
) {
    debug_assert!(out_cells <= cells + 1);
    chi.clear();
    let mut sign = 1i8;
    for i in 0..cells {
        if src[i * stride] & 1 == 1 {
            chi.push(sign);
            sign = -sign;
        } else {
            chi.push(0);
        }
    }
    dst.clear();
    dst.resize(out_cells * stride, 0);
    for i in 0..out_cells {
        // Leftover from the left neighbour if it went right, own leftover if it went left.
        let mut extra = 0u64;
        if i > 0 && chi[i - 1] > 0 {
            extra += 1;
        }
        if i < cells && chi[i] < 0 {
            extra += 1;
        }
        let out = &mut dst[i * stride..i * stride + active];
        let left = if i > 0 {
            Some(&src[(i - 1) * stride..(i - 1) * stride + active])
        } else {
            None
        };
        let own = if i < cells {
            Some(&src[i * stride..i * stride + active])
        } else {
            None
        };
        let mut carry = extra as u128;
        for l in 0..active {
            let mut s = carry;
            if let Some(x) = left {
                s += half_limb(x, l) as u128;
            }
            if let Some(x) = own {
                s += half_limb(x, l) as u128;
            }
            out[l] = s as u64;
            carry = s >> 64;
        }
        debug_assert_eq!(carry, 0);
    }
}

#[inline(always)]
fn half_limb(x: &[u64], l: usize) -> u64 {
    let hi = if l + 1 < x.len() { x[l + 1] << 63 } else { 0 };
    (x[l] >> 1) | hi
}

/// The matching step of the scaled discrepancy `E_t = 2^t (f_t - g_t)`:
/// `E_{t+1}(j) = E_t(j-1) + E_t(j+1) + 2^t (chi(j-1) - chi(j+1))`, with the
/// same cell layout as [`liar_step`].
#[allow(clippy::too_many_arguments)]
pub(crate) fn scaled_discrepancy_step(
    src: &[u64],
    cells: usize,
    stride: usize,
    active: usize,
    t: u64,
    chi: &[i8],
    dst: &mut Vec<u64>,
    out_cells: usize,
) {
    dst.clear();
    dst.resize(out_cells * stride, 0);
    for i in 0..out_cells {
        let out = &mut dst[i * stride..i * stride + active];
        if i > 0 {
            out.copy_from_slice(&src[(i - 1) * stride..(i - 1) * stride + active]);
        }
        if i < cells {
            add_assign(out, &src[i * stride..i * stride + active]);
        }
        let mut c = 0i64;
        if i > 0 {
            c += chi[i - 1] as i64;
        }
        if i < cells {
            c -= chi[i] as i64;
        }
        add_small_shifted(out, c, t);
    }
}

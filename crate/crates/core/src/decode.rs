//! Successive cancellation decoding and automorphism ensemble SC
//! decoding with maximum-likelihood candidate selection.
//!
//! LLRs follow the convention `ln(P(y|0) / P(y|1))`: positive means bit 0
//! is more likely. `+inf` entries encode positions known to be zero.

use rand::Rng;

use crate::code::InformationSet;
use crate::error::{Error, Result};
use crate::symmetry::{
    blta_group_order, block_profile, is_automorphism, permute_vector, sample_blta,
    AffinePermutation,
};
use crate::transform;

/// Check-node kernel choice. The exact kernel keeps the design metric
/// clean; min-sum is only for speed studies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Kernel {
    #[default]
    Exact,
    MinSum,
}

/// Outcome of one decode: the message estimate, its re-encoded codeword,
/// and the BPSK correlation score used for ML selection.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodeResult {
    pub message: Vec<u8>,
    pub codeword: Vec<u8>,
    pub score: f64,
}

/// Correlation metric `sum_i (1 - 2 c_i) * llr_i`, maximal for the ML
/// codeword under BPSK/AWGN.
pub fn correlation(codeword: &[u8], llr: &[f64]) -> f64 {
    codeword
        .iter()
        .zip(llr)
        .map(|(&c, &l)| if c == 0 { l } else { -l })
        .sum()
}

/// Exact boxplus: sign-min plus the log-domain correction, safe for
/// infinite inputs.
fn f_exact(a: f64, b: f64) -> f64 {
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    let m = a.abs().min(b.abs());
    if a.abs().is_infinite() || b.abs().is_infinite() {
        return sign * m;
    }
    sign * m + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
}

fn f_min_sum(a: f64, b: f64) -> f64 {
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    sign * a.abs().min(b.abs())
}

fn g_combine(a: f64, b: f64, u: u8) -> f64 {
    if u == 0 {
        b + a
    } else {
        b - a
    }
}

fn sc_recurse(llr: &[f64], frozen: &[bool], kernel: Kernel, u_out: &mut Vec<u8>) {
    let n = llr.len();
    if n == 1 {
        let bit = if frozen[0] {
            0
        } else if llr[0] < 0.0 {
            1
        } else {
            0 // ties decide 0
        };
        u_out.push(bit);
        return;
    }
    let half = n / 2;
    let f = match kernel {
        Kernel::Exact => f_exact,
        Kernel::MinSum => f_min_sum,
    };
    let left_llr: Vec<f64> = (0..half).map(|i| f(llr[i], llr[i + half])).collect();
    let left_start = u_out.len();
    sc_recurse(&left_llr, &frozen[..half], kernel, u_out);
    // Partial sums of the left decisions feed the g stage.
    let mut v_left = u_out[left_start..].to_vec();
    transform::polar_transform(&mut v_left);
    let right_llr: Vec<f64> = (0..half)
        .map(|i| g_combine(llr[i], llr[i + half], v_left[i]))
        .collect();
    sc_recurse(&right_llr, &frozen[half..], kernel, u_out);
}

/// Successive cancellation decoding. Frozen bits (the complement of the
/// information set, plus any `frozen_overrides`) decode as zero;
/// information bits decode by LLR sign.
pub fn sc_decode(
    info: &InformationSet,
    llr: &[f64],
    frozen_overrides: Option<&InformationSet>,
) -> Result<DecodeResult> {
    sc_decode_with(info, llr, frozen_overrides, Kernel::Exact)
}

pub fn sc_decode_with(
    info: &InformationSet,
    llr: &[f64],
    frozen_overrides: Option<&InformationSet>,
    kernel: Kernel,
) -> Result<DecodeResult> {
    let n_len = info.block_len();
    if llr.len() != n_len {
        return Err(Error::InvalidArgument(format!(
            "LLR vector has length {}, block length is {n_len}",
            llr.len()
        )));
    }
    let frozen: Vec<bool> = (0..n_len as u16)
        .map(|i| !info.contains(i) || frozen_overrides.is_some_and(|o| o.contains(i)))
        .collect();
    let mut u = Vec::with_capacity(n_len);
    sc_recurse(llr, &frozen, kernel, &mut u);
    let message: Vec<u8> = info.iter().map(|i| u[i as usize]).collect();
    let mut codeword = u;
    transform::polar_transform(&mut codeword);
    let score = correlation(&codeword, llr);
    Ok(DecodeResult { message, codeword, score })
}

/// Pick the maximum-correlation candidate; ties keep the earliest.
pub fn ml_select(candidates: Vec<DecodeResult>, llr: &[f64]) -> Result<DecodeResult> {
    let mut best: Option<DecodeResult> = None;
    for mut cand in candidates {
        cand.score = correlation(&cand.codeword, llr);
        match &best {
            Some(b) if cand.score <= b.score => {}
            _ => best = Some(cand),
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("ml_select on empty candidate list".into()))
}

/// An ensemble of automorphisms for AE-SC decoding. When
/// `include_identity` is set the first entry is the identity, and the
/// identity path may additionally freeze `padded_positions` (known-zero
/// message bits of a zero-padded code).
#[derive(Clone, Debug)]
pub struct EnsembleConfig {
    pub perms: Vec<AffinePermutation>,
    pub include_identity: bool,
    pub padded_positions: Option<InformationSet>,
}

impl EnsembleConfig {
    pub fn new(
        perms: Vec<AffinePermutation>,
        include_identity: bool,
        padded_positions: Option<InformationSet>,
    ) -> Result<Self> {
        if perms.is_empty() {
            return Err(Error::InvalidArgument("ensemble must not be empty".into()));
        }
        for (i, p) in perms.iter().enumerate() {
            if perms[..i].contains(p) {
                return Err(Error::InvalidArgument("ensemble permutations must be distinct".into()));
            }
        }
        if include_identity && !perms[0].is_identity() {
            return Err(Error::InvalidArgument(
                "include_identity requires the identity in slot 0".into(),
            ));
        }
        Ok(Self { perms, include_identity, padded_positions })
    }

    pub fn ensemble_size(&self) -> usize {
        self.perms.len()
    }

    /// Sample an ensemble of `m` distinct automorphisms of the code from
    /// its BLTA group. With `include_identity` the identity occupies slot
    /// 0 and the remaining `m - 1` are drawn without replacement.
    pub fn sample(
        info: &InformationSet,
        m: usize,
        include_identity: bool,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("ensemble size must be positive".into()));
        }
        let profile = block_profile(info);
        if (m as u128) > blta_group_order(&profile) {
            return Err(Error::InvalidArgument(format!(
                "ensemble size {m} exceeds the BLTA group order {}",
                blta_group_order(&profile)
            )));
        }
        let mut perms: Vec<AffinePermutation> = Vec::with_capacity(m);
        if include_identity {
            perms.push(AffinePermutation::identity(info.n()));
        }
        while perms.len() < m {
            let cand = sample_blta(&profile, rng);
            if !perms.contains(&cand) {
                perms.push(cand);
            }
        }
        debug_assert!(perms.iter().all(|p| is_automorphism(p, info)));
        Self::new(perms, include_identity, None)
    }

    pub fn with_padding(mut self, padded: InformationSet) -> Self {
        self.padded_positions = Some(padded);
        self
    }
}

/// Automorphism ensemble SC decoding: each branch decodes a permuted
/// copy of the received LLRs, the codeword estimates are un-permuted,
/// and the most likely candidate wins. Branches are decoded in slot
/// order, so the result does not depend on scheduling.
pub fn ae_sc_decode(
    info: &InformationSet,
    llr: &[f64],
    cfg: &EnsembleConfig,
) -> Result<DecodeResult> {
    let mut candidates = Vec::with_capacity(cfg.perms.len());
    for (slot, perm) in cfg.perms.iter().enumerate() {
        let identity_path = cfg.include_identity && slot == 0;
        let branch_llr;
        let branch = if identity_path {
            sc_decode(info, llr, cfg.padded_positions.as_ref())?
        } else {
            branch_llr = permute_vector(perm, llr)?;
            sc_decode(info, &branch_llr, None)?
        };
        let codeword = if identity_path {
            branch.codeword
        } else {
            permute_vector(&perm.inverse(), &branch.codeword)?
        };
        let message = transform::extract_message(info, &codeword);
        let score = correlation(&codeword, llr);
        candidates.push(DecodeResult { message, codeword, score });
    }
    ml_select(candidates, llr)
}

//! Polar transform and encoders.
//!
//! The transform is the n-fold Kronecker power of `[[1,0],[1,1]]` applied
//! as an in-place butterfly; it is its own inverse over GF(2).

use crate::code::InformationSet;
use crate::error::{Error, Result};

/// In-place butterfly `x = u * G_N`. Length must be a power of two.
pub fn polar_transform(bits: &mut [u8]) {
    let n = bits.len();
    debug_assert!(n.is_power_of_two());
    let mut step = 1;
    while step < n {
        for block in (0..n).step_by(2 * step) {
            for j in block..block + step {
                bits[j] ^= bits[j + step];
            }
        }
        step *= 2;
    }
}

fn check_message_len(info: &InformationSet, msg: &[u8]) -> Result<()> {
    if msg.len() != info.len() {
        return Err(Error::InvalidArgument(format!(
            "message has {} bits, information set has {}",
            msg.len(),
            info.len()
        )));
    }
    debug_assert!(msg.iter().all(|&b| b <= 1));
    Ok(())
}

/// Non-systematic encoding: message bits go to the information indices in
/// ascending index order, frozen positions are zero, then one transform.
pub fn encode(info: &InformationSet, msg: &[u8]) -> Result<Vec<u8>> {
    check_message_len(info, msg)?;
    let mut u = vec![0u8; info.block_len()];
    for (bit, i) in msg.iter().zip(info.iter()) {
        u[i as usize] = *bit;
    }
    polar_transform(&mut u);
    Ok(u)
}

/// Systematic encoding: the codeword restricted to the information
/// indices equals the message. Transform, re-freeze, transform again;
/// valid for any information set closed under binary domination (all
/// UPO-compliant sets are).
pub fn systematic_encode(info: &InformationSet, msg: &[u8]) -> Result<Vec<u8>> {
    check_message_len(info, msg)?;
    let mut x = vec![0u8; info.block_len()];
    for (bit, i) in msg.iter().zip(info.iter()) {
        x[i as usize] = *bit;
    }
    polar_transform(&mut x);
    for i in 0..x.len() as u16 {
        if !info.contains(i) {
            x[i as usize] = 0;
        }
    }
    polar_transform(&mut x);
    Ok(x)
}

/// Recover the message of a codeword (inverse transform, then read the
/// information positions).
pub fn extract_message(info: &InformationSet, codeword: &[u8]) -> Vec<u8> {
    debug_assert_eq!(codeword.len(), info.block_len());
    let mut u = codeword.to_vec();
    polar_transform(&mut u);
    info.iter().map(|i| u[i as usize]).collect()
}

/// Membership test: a vector is a codeword iff its inverse transform is
/// zero on every frozen position.
pub fn is_codeword(info: &InformationSet, word: &[u8]) -> bool {
    if word.len() != info.block_len() {
        return false;
    }
    let mut u = word.to_vec();
    polar_transform(&mut u);
    (0..word.len() as u16).all(|i| info.contains(i) || u[i as usize] == 0)
}

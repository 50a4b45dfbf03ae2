//! Seeded Toeplitz extractor over GF(2).

use crate::randomness::protocol::ProtocolTranscript;
use crate::randomness::RandomnessError;

/// Multiply the Toeplitz matrix defined by `seed` with the raw bit string.
///
/// With `n` raw bits and `m` output bits the seed must hold `n + m - 1`
/// bits; the matrix is `T[i][j] = seed[i - j + n - 1]` and the output is
/// `out[i] = xor_j T[i][j] & raw[j]`.
pub fn toeplitz_extract(
    raw: &[u8],
    seed: &[u8],
    out_len: usize,
) -> Result<Vec<u8>, RandomnessError> {
    if raw.iter().chain(seed.iter()).any(|&b| b > 1) {
        return Err(RandomnessError::LengthMismatch("inputs must be bits".into()));
    }
    if out_len == 0 {
        return Err(RandomnessError::LengthMismatch("output length must be positive".into()));
    }
    let n = raw.len();
    if seed.len() != n + out_len - 1 {
        return Err(RandomnessError::LengthMismatch(format!(
            "seed has {} bits, need {} for {} raw and {} output bits",
            seed.len(),
            n + out_len - 1,
            n,
            out_len
        )));
    }
    let mut out = vec![0u8; out_len];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0u8;
        for (j, &r) in raw.iter().enumerate() {
            acc ^= seed[i + n - 1 - j] & r;
        }
        *o = acc;
    }
    Ok(out)
}

/// Extract from an accepted protocol transcript, refusing requests beyond
/// the certified length.
pub fn extract_from_transcript(
    transcript: &ProtocolTranscript,
    d: usize,
    seed: &[u8],
    out_len: usize,
) -> Result<Vec<u8>, RandomnessError> {
    if (out_len as f64) > transcript.certified_bits {
        return Err(RandomnessError::ExceedsCertified {
            requested: out_len,
            certified: transcript.certified_bits,
        });
    }
    toeplitz_extract(&transcript.raw_bits(d), seed, out_len)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_zero_raw_gives_all_zero_output() {
        let raw = vec![0u8; 16];
        let seed = vec![1u8; 16 + 4 - 1];
        assert_eq!(toeplitz_extract(&raw, &seed, 4).unwrap(), vec![0, 0, 0, 0]);
    }

    #[test]
    fn matches_hand_computed_fixture() {
        // 8 raw bits, 3 output bits, 10 seed bits; product computed by hand.
        let raw = [1u8, 0, 1, 1, 0, 1, 0, 0];
        let seed = [1u8, 0, 1, 1, 0, 0, 1, 0, 1, 1];
        assert_eq!(toeplitz_extract(&raw, &seed, 3).unwrap(), vec![1, 1, 0]);
    }

    #[test]
    fn linearity_in_the_raw_string() {
        let seed: Vec<u8> = (0..20).map(|i| ((i * 7 + 3) % 5 < 2) as u8).collect();
        let a: Vec<u8> = (0..12).map(|i| (i % 3 == 0) as u8).collect();
        let b: Vec<u8> = (0..12).map(|i| (i % 4 == 1) as u8).collect();
        let xor: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let ea = toeplitz_extract(&a, &seed, 9).unwrap();
        let eb = toeplitz_extract(&b, &seed, 9).unwrap();
        let ex = toeplitz_extract(&xor, &seed, 9).unwrap();
        let combined: Vec<u8> = ea.iter().zip(&eb).map(|(x, y)| x ^ y).collect();
        assert_eq!(ex, combined);
    }

    #[test]
    fn rejects_length_mismatch_and_non_bits() {
        let raw = vec![1u8; 8];
        assert!(toeplitz_extract(&raw, &vec![1u8; 9], 3).is_err());
        assert!(toeplitz_extract(&raw, &vec![2u8; 10], 3).is_err());
        assert!(toeplitz_extract(&raw, &vec![1u8; 10], 0).is_err());
    }
}

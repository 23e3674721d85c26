use std::collections::HashSet;

use super::pattern::canonical_labels;
use crate::error::{Error, Result};

pub const DEFAULT_STATE_ENUMERATION_CAP: usize = 5;

/// Number of distinct IBD patterns for `n` individuals. With
/// `inbreeding = false`, patterns in which someone carries two IBD genes are
/// excluded.
pub fn count_states(n: usize, inbreeding: bool) -> Result<usize> {
    count_states_with_cap(n, inbreeding, DEFAULT_STATE_ENUMERATION_CAP)
}

pub fn count_states_with_cap(n: usize, inbreeding: bool, cap: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidPattern("need at least one individual".into()));
    }
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    let len = 2 * n;
    let mut seen = HashSet::new();
    // restricted growth strings enumerate set partitions of the 2n genes
    let mut rgs = vec![1u32; len];
    let mut max = vec![1u32; len];
    loop {
        if inbreeding || rgs.chunks(2).all(|p| p[0] != p[1]) {
            seen.insert(canonical_labels(&rgs));
        }
        // next string: rightmost position that can grow
        let mut k = len - 1;
        while k > 0 && rgs[k] > max[k - 1] {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        rgs[k] += 1;
        max[k] = max[k - 1].max(rgs[k]);
        for j in k + 1..len {
            rgs[j] = 1;
            max[j] = max[k];
        }
    }
    Ok(seen.len())
}

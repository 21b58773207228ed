//! Fair-share thresholds: proportional share (Prop), round robin share
//! (RRS), pessimistic proportional share (PPS) and maximin share (MMS).
//!
//! With `m` issues, `n` players and `p = ⌊m/n⌋`, and `u⁽¹⁾ ≥ … ≥ u⁽ᵐ⁾` a
//! player's per-issue maxima in non-ascending order:
//!
//! * `Prop = (1/n) Σ_k u⁽ᵏ⁾`
//! * `RRS  = Σ_{k=1..p} u⁽ᵏⁿ⁾`
//! * `PPS  = Σ_{k=m-p+1..m} u⁽ᵏ⁾`
//! * `MMS  = max over partitions of the issues into n bundles of the
//!   minimum bundle value`
//!
//! For every player `Prop ≥ MMS ≥ RRS ≥ PPS ≥ 0`.

use num::{BigUint, One, Zero};

use crate::error::{FairError, Result};
use crate::model::DecisionInstance;
use crate::rational::{sum, Rational};

pub const DEFAULT_MMS_CAP: u64 = 1_000_000;

/// Shares of a single player.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayerShares {
    pub prop: Rational,
    pub rrs: Rational,
    pub pps: Rational,
    pub mms: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareProfile {
    /// `⌊m/n⌋`.
    pub p: usize,
    pub players: Vec<PlayerShares>,
}

pub(crate) fn prop_from_sorted(sorted: &[Rational], n: usize) -> Rational {
    sum(sorted) / Rational::from_integer(n.into())
}

pub(crate) fn rrs_from_sorted(sorted: &[Rational], n: usize) -> Rational {
    let p = sorted.len() / n;
    sum((1..=p).map(|k| &sorted[k * n - 1]))
}

pub(crate) fn pps_from_sorted(sorted: &[Rational], n: usize) -> Rational {
    let p = sorted.len() / n;
    sum(&sorted[sorted.len() - p..])
}

fn player_check(instance: &DecisionInstance, player: usize) -> Result<()> {
    instance.check()?;
    if player >= instance.players {
        return Err(FairError::IndexOutOfRange(format!(
            "player {player} of {}",
            instance.players
        )));
    }
    Ok(())
}

pub fn prop_share(instance: &DecisionInstance, player: usize) -> Result<Rational> {
    player_check(instance, player)?;
    Ok(prop_from_sorted(
        &instance.max_utilities(player).sorted,
        instance.players,
    ))
}

pub fn rrs_share(instance: &DecisionInstance, player: usize) -> Result<Rational> {
    player_check(instance, player)?;
    Ok(rrs_from_sorted(
        &instance.max_utilities(player).sorted,
        instance.players,
    ))
}

pub fn pps_share(instance: &DecisionInstance, player: usize) -> Result<Rational> {
    player_check(instance, player)?;
    Ok(pps_from_sorted(
        &instance.max_utilities(player).sorted,
        instance.players,
    ))
}

/// Number of set partitions of `items` elements into at most `blocks`
/// (possibly empty) bundles: `Σ_{j≤blocks} S(items, j)`.
pub fn partition_count(items: usize, blocks: usize) -> BigUint {
    // Stirling numbers of the second kind, row by row.
    let mut row = vec![BigUint::zero(); blocks + 1];
    row[0] = BigUint::one();
    for _ in 0..items {
        let mut next = vec![BigUint::zero(); blocks + 1];
        for j in 1..=blocks {
            next[j] = &row[j] * j + &row[j - 1];
        }
        row = next;
    }
    row.into_iter().sum()
}

/// Maximin share by brute force over set partitions of the issues into `n`
/// possibly empty bundles. Fails when the partition count exceeds `cap`.
pub fn mms_share(instance: &DecisionInstance, player: usize, cap: u64) -> Result<Rational> {
    player_check(instance, player)?;
    let values = instance.max_utilities(player).per_issue;
    mms_of_values(&values, instance.players, cap)
}

pub(crate) fn mms_of_values(values: &[Rational], bundles: usize, cap: u64) -> Result<Rational> {
    let required = partition_count(values.len(), bundles);
    if required > BigUint::from(cap) {
        return Err(FairError::CapExceeded { required, cap });
    }
    if values.len() < bundles {
        return Ok(Rational::zero());
    }
    let mut sums = vec![Rational::zero(); bundles];
    let mut best = Rational::zero();
    partition_search(values, 0, 0, &mut sums, &mut best);
    Ok(best)
}

/// Enumerates restricted growth strings: item `k` goes to an already used
/// bundle or opens the next one.
fn partition_search(
    values: &[Rational],
    item: usize,
    used: usize,
    sums: &mut [Rational],
    best: &mut Rational,
) {
    if item == values.len() {
        let worst = sums.iter().min().expect("at least one bundle");
        if worst > best {
            *best = worst.clone();
        }
        return;
    }
    let limit = (used + 1).min(sums.len());
    for bundle in 0..limit {
        sums[bundle] += &values[item];
        partition_search(values, item + 1, used.max(bundle + 1), sums, best);
        sums[bundle] -= &values[item];
    }
}

/// All shares for every player. MMS is computed only when `mms_cap` is set.
pub fn share_profile(instance: &DecisionInstance, mms_cap: Option<u64>) -> Result<ShareProfile> {
    instance.check()?;
    let n = instance.players;
    let players = (0..n)
        .map(|i| {
            let maxima = instance.max_utilities(i);
            let mms = match mms_cap {
                Some(cap) => Some(mms_of_values(&maxima.per_issue, n, cap)?),
                None => None,
            };
            Ok(PlayerShares {
                prop: prop_from_sorted(&maxima.sorted, n),
                rrs: rrs_from_sorted(&maxima.sorted, n),
                pps: pps_from_sorted(&maxima.sorted, n),
                mms,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShareProfile {
        p: instance.issue_count() / n,
        players,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{example1, example2, nash_pps_gap, weighted_welfare_gap};
    use crate::rational::{int, rat};

    #[test]
    fn example1_shares_are_all_one() {
        let profile = share_profile(&example1(), Some(DEFAULT_MMS_CAP)).unwrap();
        assert_eq!(profile.p, 1);
        for shares in &profile.players {
            assert_eq!(shares.prop, int(1));
            assert_eq!(shares.rrs, int(1));
            assert_eq!(shares.pps, int(1));
            assert_eq!(shares.mms, Some(int(1)));
        }
    }

    #[test]
    fn example2_shares() {
        let instance = example2();
        let profile = share_profile(&instance, Some(DEFAULT_MMS_CAP)).unwrap();
        let p1 = &profile.players[0];
        assert_eq!((&p1.prop, &p1.rrs, &p1.pps), (&int(4), &int(4), &int(4)));
        let p2 = &profile.players[1];
        assert_eq!(p2.prop, int(2));
        assert_eq!(p2.mms, Some(int(2)));
        assert_eq!(p2.rrs, int(2));
        assert_eq!(p2.pps, int(0));
        assert_eq!(prop_share(&instance, 1).unwrap(), int(2));
        assert_eq!(rrs_share(&instance, 0).unwrap(), int(4));
        assert_eq!(pps_share(&instance, 1).unwrap(), int(0));
        assert_eq!(pps_share(&instance, 0).unwrap(), int(4));
    }

    #[test]
    fn gap_example_rrs_is_five() {
        let goods = weighted_welfare_gap().goods;
        let public = goods.to_public();
        assert_eq!(rrs_share(&public, 0).unwrap(), int(5));
        assert_eq!(rrs_share(&public, 1).unwrap(), int(5));
    }

    #[test]
    fn fewer_issues_than_players() {
        let instance = DecisionInstance::from_tables(
            3,
            vec![
                vec![vec![int(4)], vec![int(1)], vec![int(2)]],
                vec![vec![int(3)], vec![int(5)], vec![int(0)]],
            ],
        );
        for i in 0..3 {
            assert_eq!(rrs_share(&instance, i).unwrap(), int(0));
            assert_eq!(pps_share(&instance, i).unwrap(), int(0));
            assert_eq!(mms_share(&instance, i, 100).unwrap(), int(0));
        }
        assert_eq!(prop_share(&instance, 0).unwrap(), rat(7, 3));
    }

    #[test]
    fn zero_instance_has_zero_shares() {
        let instance = DecisionInstance::from_tables(
            2,
            vec![vec![vec![int(0), int(0)], vec![int(0), int(0)]]; 3],
        );
        let profile = share_profile(&instance, Some(100)).unwrap();
        for shares in profile.players {
            assert_eq!(shares.prop, int(0));
            assert_eq!(shares.rrs, int(0));
            assert_eq!(shares.pps, int(0));
            assert_eq!(shares.mms, Some(int(0)));
        }
    }

    #[test]
    fn nash_pps_gap_pps_is_one() {
        let family = nash_pps_gap(5).unwrap();
        assert_eq!(pps_share(&family.instance, 0).unwrap(), int(1));
    }

    #[test]
    fn partition_counts() {
        // Bell numbers when blocks >= items.
        assert_eq!(partition_count(4, 4), BigUint::from(15u32));
        assert_eq!(partition_count(5, 10), BigUint::from(52u32));
        // 2 blocks: 2^(m-1) including the single-block partition.
        assert_eq!(partition_count(8, 2), BigUint::from(128u32));
        assert_eq!(partition_count(0, 3), BigUint::from(1u32));
    }

    #[test]
    fn mms_cap_is_enforced() {
        let err = mms_share(&example2(), 0, 127).unwrap_err();
        assert_eq!(
            err,
            FairError::CapExceeded {
                required: BigUint::from(128u32),
                cap: 127
            }
        );
        assert!(mms_share(&example2(), 0, 128).is_ok());
    }

    #[test]
    fn out_of_range_player() {
        assert!(prop_share(&example1(), 2).is_err());
    }
}

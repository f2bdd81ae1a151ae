mod common;

use std::collections::HashSet;

use filtsens::closedform::CaseTag;
use filtsens::rational::TimeDomain;

use common::{consistency_failures, m_paths, p_paths, random_batch};

#[test]
fn continuous_systems_agree_on_every_route() {
    let batch = random_batch(11, TimeDomain::Continuous, 36);
    let mut tags = HashSet::new();
    for (i, g) in batch.iter().enumerate() {
        let failures = consistency_failures(&g.system);
        assert!(failures.is_empty(), "system {i} ({:?}): {failures:?}", g.target);
        tags.insert(p_paths(&g.system).closed.case);
        tags.insert(m_paths(&g.system).closed.case);
    }
    for t in [
        CaseTag::CtPCase1,
        CaseTag::CtPCase2,
        CaseTag::CtPCase3Bounded,
        CaseTag::CtPUnbounded,
        CaseTag::CtMBounded,
        CaseTag::CtMUnbounded,
    ] {
        assert!(tags.contains(&t), "{t} never produced");
    }
}

#[test]
fn discrete_systems_agree_on_every_route() {
    let batch = random_batch(12, TimeDomain::Discrete, 18);
    let mut tags = HashSet::new();
    for (i, g) in batch.iter().enumerate() {
        let failures = consistency_failures(&g.system);
        assert!(failures.is_empty(), "system {i} ({:?}): {failures:?}", g.target);
        tags.insert(p_paths(&g.system).closed.case);
    }
    assert!(tags.contains(&CaseTag::DtPCase1) && tags.contains(&CaseTag::DtPCase2));
}

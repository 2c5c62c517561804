use dpre::acceptance::{run_suite, Status, CRITERIA};

#[test]
fn acceptance_suite() {
    let ids: Vec<u32> = CRITERIA.iter().map(|c| c.0).collect();
    let outcomes = run_suite(&ids, |o| println!("{o}"));
    let failed: Vec<u32> = outcomes.iter().filter(|o| o.status == Status::Fail).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

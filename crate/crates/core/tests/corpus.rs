mod common;

#[test]
fn corpus_round_trip() {
    common::criteria::corpus_round_trip().unwrap();
}

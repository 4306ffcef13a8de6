use rotorlab_web::{goldbug_summary, rotor_frame, sandpile_frame, MAX_BUGS};

#[test]
fn rotor_frame_is_rgba() {
    let f = rotor_frame(5).unwrap();
    assert_eq!((f.width(), f.height()), (5, 5));
    let px = f.rgba();
    assert_eq!(px.len(), 100);
    assert!(px.chunks(4).all(|p| p[3] == 255));
    // centre pixel: origin rotor points East again after four departures
    assert_eq!(&px[4 * 12..4 * 12 + 3], &[255, 0, 0]);
    assert!(rotor_frame(MAX_BUGS + 1).is_err());
}

#[test]
fn sandpile_frames() {
    let g = sandpile_frame(1000, "greedy").unwrap();
    let s = sandpile_frame(1000, "standard").unwrap();
    assert_eq!(g.width(), g.height());
    assert!(g.width() < s.width());
    assert!(sandpile_frame(10, "wet").is_err());
}

#[test]
fn goldbug_text() {
    let s = goldbug_summary(117).unwrap();
    assert!(s.starts_with("117 bugs: 72 left, 45 right"), "{s}");
    assert!(goldbug_summary(0).unwrap().contains("ratio -"));
}

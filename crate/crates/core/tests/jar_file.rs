use std::sync::Arc;

use statejar::header::{parse_set_cookie, Mode};
use statejar::{Clock, Jar, ManualClock, RequestContext, StoreResult};

const GOLDEN: &str = include_str!("golden/jar.txt");

fn build() -> (Jar, Arc<ManualClock>) {
    let clock = Arc::new(ManualClock::new(862_000_000));
    let mut jar = Jar::new(clock.clone());
    let site = RequestContext::from_url("http://www.shop.com/acme/login").unwrap();
    let mut store = |text: &str, mode: Mode| {
        let spec = parse_set_cookie(text, mode).unwrap().remove(0);
        assert_eq!(jar.store(spec, &site), StoreResult::Stored, "{text}");
        clock.advance(10);
    };
    store("Customer=WILE_E_COYOTE; path=/acme; expires=Sun, 27 Apr 1997 01:16:23 GMT", Mode::V0);
    store("xx=\"1=2&3-4\"; Comment=\"blah\"; Version=1; Max-Age=15552000; Path=/; Domain=.shop.com", Mode::V1);
    store("sess=1", Mode::V0);
    store(
        "Part_Number=\"Rocket_Launcher_0001\"; Version=\"1\"; Path=\"/acme\"; Port=\"8080,80\"; Max-Age=60; Secure; Comment=\"a\tb\"; Flag; Odd=-x",
        Mode::V1,
    );
    (jar, clock)
}

#[test]
fn save_matches_golden_file() {
    let (jar, _) = build();
    assert_eq!(jar.len(), 4);
    assert_eq!(jar.save(), GOLDEN);
}

#[test]
fn load_restores_persistent_cookies() {
    let (mut jar, clock) = build();
    let loaded = Jar::load(GOLDEN, clock.clone()).unwrap();
    jar.end_session();
    assert_eq!(loaded, jar);
    assert_eq!(loaded.save(), GOLDEN);

    let ctx = RequestContext::from_url("https://www.shop.com/acme/parts").unwrap();
    let names: Vec<String> = loaded.select(&ctx, clock.now()).into_iter().map(|c| c.spec.name).collect();
    assert_eq!(names, ["Customer", "xx"]);
}

#[test]
fn load_rejects_corrupt_lines() {
    let clock: Arc<dyn Clock> = Arc::new(ManualClock::new(0));
    let truncated: String = GOLDEN.lines().take(3).map(|l| format!("{}\n", &l[..l.len() / 2])).collect();
    assert!(Jar::load(&truncated, clock.clone()).is_err());
    let doubled = format!("{GOLDEN}{}\n", GOLDEN.lines().nth(2).unwrap());
    assert!(Jar::load(&doubled, clock).is_err());
}

//! Deterministic generator of KDD-format connection records for demos and
//! smoke tests.
//!
//! Records follow class-conditional traffic shapes (SYN floods, ICMP echo
//! storms, password guessing, plain web/mail sessions and so on) with seeded
//! jitter, so a fixed seed reproduces the corpus byte for byte.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rsids_core::kdd::{target_counts, AttackClass, ClassRatios, SampleError};

/// 41 raw field tokens plus a label.
struct Record {
    fields: [String; 41],
    label: &'static str,
}

const RATE_FIELDS: [usize; 15] = [25, 26, 27, 28, 29, 30, 31, 34, 35, 36, 37, 38, 39, 40, 41];

impl Record {
    fn new(label: &'static str) -> Self {
        let fields = std::array::from_fn(|i| {
            if RATE_FIELDS.contains(&(i + 1)) {
                "0.00".to_string()
            } else {
                "0".to_string()
            }
        });
        Record { fields, label }
    }

    fn int(&mut self, index: usize, value: u64) -> &mut Self {
        self.fields[index - 1] = value.to_string();
        self
    }

    fn sym(&mut self, index: usize, value: &str) -> &mut Self {
        self.fields[index - 1] = value.to_string();
        self
    }

    fn rate(&mut self, index: usize, value: f64) -> &mut Self {
        self.fields[index - 1] = format!("{value:.2}");
        self
    }

    fn line(&self) -> String {
        format!("{},{}.", self.fields.join(","), self.label)
    }
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, options: &[(T, u32)]) -> T {
    let total: u32 = options.iter().map(|(_, w)| w).sum();
    let mut roll = rng.gen_range(0..total);
    for &(value, weight) in options {
        if roll < weight {
            return value;
        }
        roll -= weight;
    }
    options[options.len() - 1].0
}

fn normal(rng: &mut ChaCha8Rng) -> String {
    // a slice of real traffic is failed or odd-looking: connection timeouts,
    // rejected ports, bare pings; they shadow the flood/sweep shapes
    let oddball = rng.gen_range(0..100u32);
    if oddball < 2 {
        let mut r = Record::new("normal");
        r.sym(2, "tcp")
            .sym(3, pick(rng, &[("http", 5), ("private", 3), ("smtp", 2)]));
        r.sym(4, "S0").rate(25, 1.0).rate(26, 1.0);
        let count = rng.gen_range(1..80);
        r.int(23, count).int(24, count.max(2) / 2);
        r.rate(29, rng.gen_range(0.3..1.0));
        r.int(32, rng.gen_range(1..=255))
            .rate(38, rng.gen_range(0.5..1.0));
        return r.line();
    }
    if oddball < 4 {
        let mut r = Record::new("normal");
        r.sym(2, "tcp")
            .sym(3, pick(rng, &[("private", 5), ("other", 3), ("finger", 2)]));
        r.sym(4, "REJ").rate(27, 1.0).rate(28, 1.0);
        r.int(23, rng.gen_range(1..10)).int(24, rng.gen_range(1..4));
        r.rate(30, rng.gen_range(0.2..0.9));
        r.int(32, rng.gen_range(1..=255))
            .rate(40, rng.gen_range(0.3..1.0));
        return r.line();
    }
    if oddball < 7 {
        let mut r = Record::new("normal");
        r.sym(2, "icmp")
            .sym(3, pick(rng, &[("eco_i", 5), ("urp_i", 3), ("ecr_i", 2)]));
        r.sym(4, "SF").int(5, rng.gen_range(8..64));
        r.int(23, rng.gen_range(1..6))
            .int(24, rng.gen_range(1..6))
            .rate(29, 1.0);
        r.int(32, rng.gen_range(1..120))
            .int(33, rng.gen_range(1..60));
        return r.line();
    }
    let service = pick(
        rng,
        &[
            ("http", 55),
            ("smtp", 12),
            ("ftp_data", 10),
            ("domain_u", 8),
            ("telnet", 5),
            ("pop_3", 5),
            ("other", 5),
        ],
    );
    let mut r = Record::new("normal");
    let udp = service == "domain_u";
    r.sym(2, if udp { "udp" } else { "tcp" })
        .sym(3, service)
        .sym(4, "SF");
    match service {
        "http" => {
            r.int(5, rng.gen_range(100..2500))
                .int(6, rng.gen_range(300..40000));
        }
        "smtp" => {
            r.int(5, rng.gen_range(300..3000))
                .int(6, rng.gen_range(300..1000));
        }
        "ftp_data" => {
            r.int(5, rng.gen_range(200..20000));
        }
        "domain_u" => {
            r.int(5, rng.gen_range(30..120))
                .int(6, rng.gen_range(30..450));
        }
        "telnet" => {
            r.int(1, rng.gen_range(10..300))
                .int(5, rng.gen_range(100..1500))
                .int(6, rng.gen_range(200..5000));
        }
        _ => {
            r.int(5, rng.gen_range(0..500));
        }
    }
    if !udp && service != "other" {
        r.int(12, 1); // logged_in
    }
    if rng.gen_bool(0.05) {
        r.int(10, rng.gen_range(1..3)); // a little hot activity
    }
    // mostly quiet hosts, with a busy tail that overlaps flood counts
    let count: u64 = if rng.gen_bool(0.95) {
        rng.gen_range(1..30)
    } else {
        rng.gen_range(50..200)
    };
    let srv = count.saturating_sub(rng.gen_range(0..count)).max(1);
    r.int(23, count).int(24, srv);
    r.rate(29, 1.0).rate(30, rng.gen_range(0.0..0.1));
    let host_count = rng.gen_range(1..=255);
    let host_srv = rng.gen_range(1..=host_count);
    r.int(32, host_count).int(33, host_srv);
    r.rate(34, rng.gen_range(0.5..1.0))
        .rate(36, rng.gen_range(0.0..0.2));
    r.line()
}

fn dos(rng: &mut ChaCha8Rng) -> String {
    match pick(
        rng,
        &[
            ("neptune", 60),
            ("smurf", 32),
            ("back", 4),
            ("teardrop", 3),
            ("pod", 1),
        ],
    ) {
        "neptune" => {
            let mut r = Record::new("neptune");
            let service = pick(
                rng,
                &[("private", 60), ("telnet", 15), ("http", 15), ("ftp", 10)],
            );
            r.sym(2, "tcp").sym(3, service).sym(4, "S0");
            // a slow-start tail overlaps ordinary timeout counts
            let count = if rng.gen_bool(0.8) {
                rng.gen_range(100..=511)
            } else {
                rng.gen_range(10..120)
            };
            let serror = if rng.gen_bool(0.85) {
                1.0
            } else {
                rng.gen_range(0.5..0.95)
            };
            r.int(23, count).int(24, rng.gen_range(5..25));
            r.rate(25, serror).rate(26, serror);
            r.rate(29, rng.gen_range(0.02..0.15))
                .rate(30, rng.gen_range(0.05..0.10));
            r.int(32, rng.gen_range(120..=255))
                .int(33, rng.gen_range(5..30));
            r.rate(34, rng.gen_range(0.02..0.10))
                .rate(35, rng.gen_range(0.05..0.10));
            r.rate(38, serror).rate(39, serror);
            r.line()
        }
        "smurf" => {
            let mut r = Record::new("smurf");
            let count = rng.gen_range(300..=511);
            r.sym(2, "icmp").sym(3, "ecr_i").sym(4, "SF");
            r.int(5, 1032).int(23, count).int(24, count);
            r.rate(29, 1.0);
            r.int(32, 255).int(33, 255).rate(34, 1.0);
            r.rate(36, rng.gen_range(0.9..1.0));
            r.line()
        }
        "back" => {
            let mut r = Record::new("back");
            r.sym(2, "tcp").sym(3, "http").sym(4, "SF");
            r.int(5, rng.gen_range(54000..54540))
                .int(6, rng.gen_range(2000..9000));
            r.int(12, 1).int(10, rng.gen_range(0..3));
            r.int(23, rng.gen_range(2..12))
                .int(24, rng.gen_range(2..12));
            r.rate(29, 1.0);
            r.int(32, 255).int(33, 255).rate(34, 1.0);
            r.line()
        }
        "teardrop" => {
            let mut r = Record::new("teardrop");
            r.sym(2, "udp").sym(3, "private").sym(4, "SF");
            r.int(5, 28).int(8, 3);
            let count = rng.gen_range(5..200);
            r.int(23, count).int(24, count).rate(29, 1.0);
            r.int(32, 255).int(33, rng.gen_range(100..=255));
            r.line()
        }
        _ => {
            let mut r = Record::new("pod");
            r.sym(2, "icmp").sym(3, "ecr_i").sym(4, "SF");
            r.int(5, 1480).int(8, 1);
            r.int(23, rng.gen_range(1..50))
                .int(24, rng.gen_range(1..50));
            r.rate(29, 1.0).int(32, rng.gen_range(1..=255));
            r.line()
        }
    }
}

fn probe(rng: &mut ChaCha8Rng) -> String {
    match pick(
        rng,
        &[
            ("portsweep", 35),
            ("ipsweep", 35),
            ("nmap", 15),
            ("satan", 15),
        ],
    ) {
        "portsweep" => {
            let mut r = Record::new("portsweep");
            r.sym(2, "tcp")
                .sym(3, "private")
                .sym(4, pick(rng, &[("REJ", 6), ("RSTR", 3), ("SH", 1)]));
            r.int(23, rng.gen_range(1..6)).int(24, rng.gen_range(1..3));
            r.rate(27, rng.gen_range(0.7..1.0))
                .rate(28, rng.gen_range(0.7..1.0));
            r.rate(29, rng.gen_range(0.0..0.2))
                .rate(30, rng.gen_range(0.7..1.0));
            r.int(32, 255).int(33, rng.gen_range(1..20));
            r.rate(35, rng.gen_range(0.7..1.0))
                .rate(40, rng.gen_range(0.7..1.0));
            r.line()
        }
        "ipsweep" => {
            let mut r = Record::new("ipsweep");
            r.sym(2, "icmp").sym(3, "eco_i").sym(4, "SF");
            r.int(5, pick(rng, &[(8, 1), (18, 1)]));
            r.int(23, rng.gen_range(1..10))
                .int(24, rng.gen_range(1..10));
            r.rate(29, 1.0);
            // an early sweep has touched few hosts and resembles a plain ping
            let spread = if rng.gen_bool(0.7) {
                rng.gen_range(50..=255)
            } else {
                rng.gen_range(1..50)
            };
            r.int(32, spread).int(33, rng.gen_range(1..30));
            r.rate(37, rng.gen_range(0.2..0.6));
            r.line()
        }
        "nmap" => {
            let mut r = Record::new("nmap");
            r.sym(2, pick(rng, &[("tcp", 7), ("udp", 3)]))
                .sym(3, "private");
            r.sym(4, pick(rng, &[("SH", 5), ("S0", 3), ("REJ", 2)]));
            r.int(23, rng.gen_range(1..4)).int(24, rng.gen_range(1..3));
            r.rate(25, rng.gen_range(0.3..1.0))
                .rate(30, rng.gen_range(0.5..1.0));
            r.int(32, rng.gen_range(100..=255))
                .rate(35, rng.gen_range(0.5..1.0));
            r.line()
        }
        _ => {
            let mut r = Record::new("satan");
            let service = pick(rng, &[("private", 5), ("other", 3), ("finger", 2)]);
            r.sym(2, "tcp")
                .sym(3, service)
                .sym(4, pick(rng, &[("REJ", 5), ("SF", 3), ("RSTR", 2)]));
            r.int(5, rng.gen_range(0..50));
            r.int(23, rng.gen_range(1..8)).int(24, rng.gen_range(1..4));
            r.rate(27, rng.gen_range(0.5..1.0))
                .rate(30, rng.gen_range(0.6..1.0));
            r.int(32, 255)
                .int(33, rng.gen_range(1..40))
                .rate(35, rng.gen_range(0.6..1.0));
            r.rate(40, rng.gen_range(0.5..1.0));
            r.line()
        }
    }
}

fn r2l(rng: &mut ChaCha8Rng) -> String {
    if rng.gen_bool(0.7) {
        let mut r = Record::new("guess_passwd");
        r.sym(2, "tcp")
            .sym(3, pick(rng, &[("telnet", 6), ("ftp", 4)]))
            .sym(4, "SF");
        r.int(1, rng.gen_range(2..60));
        r.int(5, rng.gen_range(100..300))
            .int(6, rng.gen_range(200..2000));
        // single-try guesses barely differ from a fumbled legitimate login
        r.int(
            11,
            if rng.gen_bool(0.75) {
                rng.gen_range(1..6)
            } else {
                rng.gen_range(0..2)
            },
        );
        r.int(23, rng.gen_range(1..4))
            .int(24, rng.gen_range(1..4))
            .rate(29, 1.0);
        r.int(32, rng.gen_range(1..=255));
        r.line()
    } else {
        let mut r = Record::new("warezclient");
        r.sym(2, "tcp").sym(3, "ftp").sym(4, "SF");
        r.int(1, rng.gen_range(30..600));
        r.int(5, rng.gen_range(200..2000))
            .int(6, rng.gen_range(10_000..700_000));
        r.int(10, rng.gen_range(1..4)).int(12, 1).int(22, 1);
        r.int(23, rng.gen_range(1..5))
            .int(24, rng.gen_range(1..5))
            .rate(29, 1.0);
        r.int(32, rng.gen_range(1..=255));
        r.line()
    }
}

fn u2r(rng: &mut ChaCha8Rng) -> String {
    let mut r = Record::new("buffer_overflow");
    r.sym(2, "tcp").sym(3, "telnet").sym(4, "SF");
    r.int(1, rng.gen_range(60..300));
    r.int(5, rng.gen_range(1000..3000))
        .int(6, rng.gen_range(300..2000));
    r.int(10, rng.gen_range(2..7)).int(12, 1).int(14, 1);
    r.int(13, rng.gen_range(1..3)).int(16, rng.gen_range(1..6));
    r.int(17, rng.gen_range(1..4)).int(18, rng.gen_range(0..2));
    r.int(23, rng.gen_range(1..4))
        .int(24, rng.gen_range(1..4))
        .rate(29, 1.0);
    r.int(32, rng.gen_range(1..=100));
    r.line()
}

/// Generates `total` records at the given class mix (largest-remainder
/// apportionment), shuffled, one per line.
pub fn generate(total: usize, ratios: &ClassRatios, seed: u64) -> Result<String, SampleError> {
    let counts = target_counts(ratios, total)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = Vec::with_capacity(total);
    for class in AttackClass::ALL {
        let make: fn(&mut ChaCha8Rng) -> String = match class {
            AttackClass::Normal => normal,
            AttackClass::Probe => probe,
            AttackClass::DoS => dos,
            AttackClass::U2R => u2r,
            AttackClass::R2L => r2l,
        };
        for _ in 0..counts[class.index()] {
            lines.push(make(&mut rng));
        }
    }
    rand::seq::SliceRandom::shuffle(&mut lines[..], &mut rng);
    let mut out = lines.join("\n");
    if !out.is_empty() {
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rsids_core::kdd::{self, SymbolMaps};

    fn mix() -> ClassRatios {
        ClassRatios {
            normal: 0.4,
            probe: 0.1,
            dos: 0.4,
            u2r: 0.02,
            r2l: 0.08,
        }
    }

    #[test]
    fn generated_records_parse_under_strict_ingest() {
        let text = generate(200, &mix(), 9).unwrap();
        let maps = SymbolMaps::default();
        let (instances, report) = kdd::load_dataset_str(&text, &maps, true).unwrap();
        assert_eq!(instances.len(), 200);
        assert_eq!(report.skipped(), 0);
    }

    #[test]
    fn class_mix_matches_the_request() {
        let text = generate(500, &mix(), 3).unwrap();
        let maps = SymbolMaps::default();
        let (_, report) = kdd::load_dataset_str(&text, &maps, true).unwrap();
        assert_eq!(report.class_counts, target_counts(&mix(), 500).unwrap());
    }

    #[test]
    fn same_seed_reproduces_bytes() {
        assert_eq!(
            generate(100, &mix(), 7).unwrap(),
            generate(100, &mix(), 7).unwrap()
        );
        assert_ne!(
            generate(100, &mix(), 7).unwrap(),
            generate(100, &mix(), 8).unwrap()
        );
    }
}

use evoset::format::{g17, trace_csv, TraceRow};
use evoset::model::parse_str;
use proptest::prelude::*;

proptest! {
    #[test]
    fn g17_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let text = g17(x);
        prop_assert_eq!(text.parse::<f64>().unwrap(), x);
        let digits = text.split('e').next().unwrap().chars().filter(char::is_ascii_digit).collect::<String>();
        prop_assert!(digits.trim_start_matches('0').len() <= 17, "{}", text);
        prop_assert!(!text.contains(','));
    }

    #[test]
    fn csv_has_one_line_per_row(measures in prop::collection::vec(prop::option::of(-1e6f64..1e6), 0..40)) {
        let rows: Vec<TraceRow> = measures
            .iter()
            .enumerate()
            .map(|(i, m)| TraceRow { k: i as u64 + 1, cardinality: Some(i), measure: *m, integral: None })
            .collect();
        let text = trace_csv(&rows);
        prop_assert!(!text.contains('\r'));
        let lines: Vec<&str> = text.lines().collect();
        prop_assert_eq!(lines.len(), rows.len() + 1);
        for (line, row) in lines[1..].iter().zip(&rows) {
            let fields: Vec<&str> = line.split(',').collect();
            prop_assert_eq!(fields.len(), 4);
            prop_assert_eq!(fields[0].parse::<u64>().unwrap(), row.k);
            prop_assert_eq!(fields[2].parse::<f64>().ok(), row.measure);
        }
    }

    #[test]
    fn digest_depends_only_on_content(width in 1u32..100, step in 1u32..100, spaced in any::<bool>()) {
        let compact = format!(r#"{{"kind":"sliding-window","width":{width},"step":{step}}}"#);
        let loose = format!("{{\n  \"step\" : {step},\n  \"kind\" : \"sliding-window\",\n  \"width\" : {width}\n}}");
        let a = parse_str("a", &compact).unwrap();
        let b = parse_str("b", if spaced { &loose } else { &compact }).unwrap();
        prop_assert_eq!(a.digest, b.digest);
    }
}

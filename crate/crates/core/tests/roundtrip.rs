use proptest::prelude::*;
use proptest::strategy::BoxedStrategy;

use transdoc_core::expr::{
    parse_defs, parse_expr, pretty, BinOp, Binding, Clause, Decimal, Expr, ExprKind, InterpSegment, OrderingLit,
    Pattern, Qualifier, SourceSpan,
};

fn node(kind: ExprKind) -> Expr {
    Expr::new(kind, SourceSpan::default())
}

fn ident() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["x", "y", "z", "f", "g", "acc", "rows", "model_", "n1", "tableData"]).prop_map(String::from)
}

fn field_name() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["a", "b", "time_s", "f1", "model"]).prop_map(String::from)
}

fn ordering() -> impl Strategy<Value = OrderingLit> {
    prop::sample::select(vec![OrderingLit::Lt, OrderingLit::Eq, OrderingLit::Gt])
}

fn leaf() -> BoxedStrategy<Expr> {
    prop_oneof![
        "-?(0|[1-9][0-9]{0,2})(\\.[0-9]{1,2})?".prop_map(|s| node(ExprKind::Num(Decimal::parse(&s).unwrap()))),
        "[a-zA-Z \"\\\\{}\\n.-]{0,8}".prop_map(|s| node(ExprKind::Str(s))),
        any::<bool>().prop_map(|b| node(ExprKind::Bool(b))),
        ordering().prop_map(|o| node(ExprKind::Ordering(o))),
        ident().prop_map(|v| node(ExprKind::Var(v))),
    ]
    .boxed()
}

fn binop() -> impl Strategy<Value = BinOp> {
    prop::sample::select(vec![
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Eq,
        BinOp::Le,
        BinOp::Lt,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::Concat,
        BinOp::And,
        BinOp::Or,
    ])
}

fn unique<T>(items: Vec<(String, T)>) -> Vec<(String, T)> {
    let mut seen = Vec::new();
    items
        .into_iter()
        .filter(|(k, _)| {
            let fresh = !seen.contains(k);
            seen.push(k.clone());
            fresh
        })
        .collect()
}

/// Clause-style function bound under `name`. At least one constructor
/// pattern keeps it from reading back as a plain lambda.
fn clause_fun(name: String, inner: BoxedStrategy<Expr>) -> BoxedStrategy<Expr> {
    (1usize..3, prop::collection::vec((ordering(), prop::option::of(ident()), inner), 1..4))
        .prop_map(move |(arity, raw)| {
            let clauses = raw
                .into_iter()
                .map(|(o, var, body)| {
                    let mut patterns = vec![Pattern::Ctor(o)];
                    for _ in 1..arity {
                        patterns.push(Pattern::Var(var.clone().unwrap_or_else(|| "v".into())));
                    }
                    Clause { patterns, body }
                })
                .collect();
            node(ExprKind::ClauseFun { name: name.clone(), clauses })
        })
        .boxed()
}

fn interp(inner: BoxedStrategy<Expr>) -> BoxedStrategy<Expr> {
    (prop::option::of("[a-z {}\"\\\\]{1,6}"), prop::collection::vec((inner, prop::option::of("[a-z {}\"]{1,6}")), 0..3))
        .prop_map(|(first, rest)| {
            let mut segments = Vec::new();
            if let Some(t) = first {
                segments.push(InterpSegment::Text(t));
            }
            for (e, t) in rest {
                segments.push(InterpSegment::Hole(e));
                if let Some(t) = t {
                    segments.push(InterpSegment::Text(t));
                }
            }
            if segments.is_empty() {
                segments.push(InterpSegment::Text(String::new()));
            }
            node(ExprKind::Interp(segments))
        })
        .boxed()
}

fn expr() -> BoxedStrategy<Expr> {
    leaf()
        .prop_recursive(4, 48, 4, |inner| {
            let binding = (ident(), prop::bool::weighted(0.25)).prop_flat_map({
                let inner = inner.clone();
                move |(name, clausal)| {
                    let value = if clausal { clause_fun(name.clone(), inner.clone()) } else { inner.clone() };
                    value.prop_map(move |value| (name.clone(), value))
                }
            });
            prop_oneof![
                (prop::collection::vec(ident(), 1..3), inner.clone())
                    .prop_map(|(params, body)| node(ExprKind::Lambda { params, body: Box::new(body) })),
                (inner.clone(), prop::collection::vec(inner.clone(), 1..3))
                    .prop_map(|(f, args)| node(ExprKind::App { func: Box::new(f), args })),
                (prop::collection::vec(binding, 1..3), inner.clone()).prop_map(|(bs, body)| {
                    let bindings = unique(bs).into_iter().map(|(name, value)| Binding { name, value }).collect();
                    node(ExprKind::Let { bindings, body: Box::new(body) })
                }),
                prop::collection::vec((field_name(), inner.clone()), 0..3)
                    .prop_map(|fs| node(ExprKind::Record(unique(fs)))),
                (inner.clone(), field_name())
                    .prop_map(|(s, field)| node(ExprKind::Field { subject: Box::new(s), field })),
                prop::collection::vec(inner.clone(), 0..3).prop_map(|xs| node(ExprKind::List(xs))),
                (
                    inner.clone(),
                    (ident(), inner.clone()),
                    prop::collection::vec(
                        prop_oneof![
                            (ident(), inner.clone()).prop_map(|(var, source)| Qualifier::Generator { var, source }),
                            inner.clone().prop_map(Qualifier::Guard),
                        ],
                        0..2
                    )
                )
                    .prop_map(|(head, (var, source), rest)| {
                        let mut qualifiers = vec![Qualifier::Generator { var, source }];
                        qualifiers.extend(rest);
                        node(ExprKind::ListComp { head: Box::new(head), qualifiers })
                    }),
                (inner.clone(), inner.clone(), inner.clone()).prop_map(|(c, t, e)| node(ExprKind::If {
                    cond: Box::new(c),
                    then_branch: Box::new(t),
                    else_branch: Box::new(e)
                })),
                (binop(), inner.clone(), inner.clone())
                    .prop_map(|(op, l, r)| node(ExprKind::BinOp { op, lhs: Box::new(l), rhs: Box::new(r) })),
                interp(inner.clone()),
            ]
        })
        .boxed()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pretty_then_parse_is_identity(e in expr()) {
        let printed = pretty(&e);
        let parsed = parse_expr(&printed).map_err(|err| TestCaseError::fail(format!("{err}\n{printed}")))?;
        prop_assert_eq!(&parsed, &e, "printed as {}", printed);
        prop_assert_eq!(pretty(&parsed), printed);
    }

    #[test]
    fn parse_error_spans_lie_within_input(src in "[a-z0-9 ()\\[\\]{}\"+*/<>=,.|`-]{0,24}") {
        if let Err(err) = parse_expr(&src) {
            prop_assert!(err.span.start <= err.span.end && err.span.end <= src.len(), "{:?} for {:?}", err, src);
            prop_assert!(!err.message.is_empty());
        }
    }
}

const GOLD_SOLUTIONS: [&str; 8] = [
    r#"(model_ "LSTM").time_s"#,
    r#"(getByCategory "Energy Sector" year).emissions /
  sum (map (fun x -> x.emissions)
    (getByYear year)) * 100"#,
    r#"sum (map (fun x -> x.emissions)
  (getByYear year)) / length records"#,
    r#"let maxEntry = maximumBy (fun x -> x.emissions)
   (filter (fun x -> x.type == "Energy Sector")
      tableData)
in maxEntry.year"#,
    r#"rankLabel "lowest"
  (findIndex "model" "CNN"
    (sort cmpTime tableData))"#,
    r#"sum (map (fun x -> x.emissions)
   (getByYear year))"#,
    r#"trendWord
  (model_ "BiLSTM" tableData).time_s
  (model_ "LSTM" tableData).time_s
  growShrink"#,
    r#"unusuallyHighLow (overallComparison [
  compareCols col "naive_bayes_r"
    (findWithKey_ "synd" "Hem." tableData)
  | col <- ["svm1_r", "svm2_r", "svm3_r", "svmr_r"]
])"#,
];

#[test]
fn gold_solutions_parse_and_round_trip() {
    for src in GOLD_SOLUTIONS {
        let e = parse_expr(src).unwrap_or_else(|err| panic!("{err}\n{src}"));
        assert_eq!(parse_expr(&pretty(&e)).unwrap(), e, "{src}");
    }
}

#[test]
fn helper_listings_parse() {
    let left = r#"let ordinalMap =
   [ { lastDigit: 1, suffix: "st" },
     { lastDigit: 2, suffix: "nd" },
     { lastDigit: 3, suffix: "rd" } ];

let ordinal n =
   if n <= 0 then error "n <= 0 not supported"
   else if (n < 4) then
      numToStr n ++
      (findWithKey_ "lastDigit" n ordinalMap).suffix
   else if (n >= 4) `and` (n <= 20) then
      numToStr n ++ "th"
   else error "n > 20 not supported";

let rankLabel word n =
   (if n == 1 then "" else ordinal n ++ "-") ++ word;"#;
    let names: Vec<String> = parse_defs(left).unwrap().into_iter().map(|d| d.name).collect();
    assert_eq!(names, ["ordinalMap", "ordinal", "rankLabel"]);

    let right = r#"let trendWord n1 n2 compareWord =
    compareWord (compare n1 n2);

let growShrink EQ = "unchanging";
    growShrink LT = "shrinking";
    growShrink GT = "growing";

let smallerHigher EQ = "equal";
    smallerHigher LT = "smaller";
    smallerHigher GT = "larger";

let improvements EQ = "no further improvements";
    improvements LT = "no further improvements";
    improvements GT = "further improvements";"#;
    let defs = parse_defs(right).unwrap();
    assert_eq!(defs.len(), 4);
    assert!(matches!(&defs[1].value.kind, ExprKind::ClauseFun { clauses, .. } if clauses.len() == 3));
}

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use gossipsub_model::attacks::{gadget_schedule, run_gadget_attack, score_prop_violation, AttackGadget};
use gossipsub_model::config::validate_config;
use gossipsub_model::engine::{run_network, run_network_violations, transition, Trace};
use gossipsub_model::event::{Event, Msg, Verb};
use gossipsub_model::propcheck::gen::{gen_counters, gen_topic, random_counters, random_global, random_topic_params};
use gossipsub_model::propcheck::{
    check_maxbound, check_prop3, prop4_scores, replay, search_counterexamples, shrink, GoodCounter, Property,
};
use gossipsub_model::scoring::{calc_score, calc_score_topic, decay_counters, max_topic_score};
use gossipsub_model::topology::{build_network, parse_topology, TopologySpec};
use gossipsub_model::types::{lookup_gctrs, lookup_score, lookup_tctrs, subscribers, GctrsMap, ScoreMap, TctrsMap};
use gossipsub_model::{
    GlobalCounters, Network, Payload, PayloadId, PeerId, Profile, Rational, RunBudget, ScoringConfig, TopicCounters,
    TopicId, TopicParams,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn eth2() -> ScoringConfig {
    Profile::eth2().cfg
}

fn agg() -> TopicId {
    TopicId::new("AGG")
}

fn blocks() -> TopicId {
    TopicId::new("BLOCKS")
}

fn pid(s: &str) -> PeerId {
    PeerId::new(s)
}

fn rational(max_num: i64, max_den: i64) -> impl Strategy<Value = Rational> {
    (0..=max_num, 1..=max_den).prop_map(|(a, b)| Rational::new(a, b))
}

fn counters() -> impl Strategy<Value = TopicCounters> {
    (
        rational(20, 4),
        rational(60, 4),
        rational(800, 2),
        rational(200, 4),
        rational(100, 4),
    )
        .prop_map(|(imd, mmd, mt, fmd, mfp)| TopicCounters::new(imd, mmd, mt, fmd, mfp))
}

fn global_counters() -> impl Strategy<Value = GlobalCounters> {
    (rational(50, 2), rational(5, 1), rational(10, 4)).prop_map(|(a, i, b)| GlobalCounters::new(a, i, b))
}

/// Valid topic params derived from a seed, on top of either shipped profile.
fn topic_params() -> impl Strategy<Value = TopicParams> {
    (any::<u64>(), any::<bool>()).prop_map(|(seed, fil)| {
        let base = if fil { Profile::filecoin() } else { Profile::eth2() };
        let base = base.cfg.global().unwrap().clone();
        random_topic_params(&mut ChaCha8Rng::seed_from_u64(seed), &base)
    })
}

fn positive_delta() -> impl Strategy<Value = Rational> {
    (1..=40i64, 1..=4i64).prop_map(|(a, b)| Rational::new(a, b))
}

fn bump(tc: &TopicCounters, which: GoodCounter, d: &Rational) -> TopicCounters {
    let mut out = tc.clone();
    match which {
        GoodCounter::FirstMessageDeliveries => out.fmd += d.clone(),
        GoodCounter::MeshMessageDeliveries => out.mmd += d.clone(),
        GoodCounter::MeshTime => out.mesh_time += d.clone(),
    }
    out
}

fn good_counter() -> impl Strategy<Value = GoodCounter> {
    prop_oneof![
        Just(GoodCounter::FirstMessageDeliveries),
        Just(GoodCounter::MeshMessageDeliveries),
        Just(GoodCounter::MeshTime),
    ]
}

/// Independent evaluation of the topic score straight from its definition.
fn topic_score_oracle(tc: &TopicCounters, wp: &TopicParams) -> Rational {
    use num_rational::BigRational;
    let r = |x: &Rational| x.inner().clone();
    let u = |x: u64| BigRational::from_integer(x.into());
    let (w, p) = (&wp.weights, &wp.params);
    let mmd = r(&tc.mmd).min(r(&p.mesh_message_deliveries_cap));
    let thr = r(&p.mesh_message_deliveries_threshold);
    let active = r(&tc.mesh_time) > u(p.activation_window) && mmd < thr;
    let deficit = if active { (&thr - &mmd) * (&thr - &mmd) } else { u(0) };
    let v = r(&p.topic_weight)
        * (r(&w.w1) * (r(&tc.mesh_time) / u(p.mesh_time_quantum)).min(u(p.time_quanta_in_mesh_cap))
            + r(&w.w2) * r(&tc.fmd).min(u(p.p2cap))
            + r(&w.w3) * deficit
            + r(&w.w3b) * r(&tc.mfp)
            + r(&w.w4) * r(&tc.imd) * r(&tc.imd));
    Rational::from(v)
}

// Scoring.

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn topic_score_never_exceeds_bound(tc in counters(), wp in topic_params()) {
        prop_assert!(calc_score_topic(&tc, &wp) <= max_topic_score(&wp));
        prop_assert!(check_maxbound(&tc, &wp).is_pass());
    }

    #[test]
    fn topic_score_matches_oracle(tc in counters(), wp in topic_params()) {
        prop_assert_eq!(calc_score_topic(&tc, &wp), topic_score_oracle(&tc, &wp));
    }

    #[test]
    fn equal_inputs_score_equally(a in counters(), b in counters(), g in global_counters()) {
        let cfg = eth2();
        let (sa, sb) = prop4_scores(&BTreeMap::from([(agg(), a.clone()), (blocks(), b.clone())]),
            &BTreeMap::from([(agg(), a), (blocks(), b)]), &g, &g, &cfg).unwrap();
        prop_assert_eq!(sa, sb);
    }

    #[test]
    fn good_counters_never_lower_active_topic_score(
        tc in counters(),
        wp in topic_params(),
        which in good_counter(),
        d in positive_delta(),
    ) {
        let mut tc = tc;
        let aw = Rational::from_u64(wp.params.activation_window);
        if tc.mesh_time <= aw {
            tc.mesh_time = aw + Rational::new(1, 2);
        }
        let after = bump(&tc, which, &d);
        prop_assert!(calc_score_topic(&after, &wp) >= calc_score_topic(&tc, &wp));
        prop_assert!(check_prop3(&tc, &d, which, &wp).is_pass());
    }

    #[test]
    fn bad_topic_counters_never_raise_topic_score(tc in counters(), wp in topic_params(), d in positive_delta(), imd in any::<bool>()) {
        let mut after = tc.clone();
        if imd { after.imd += d; } else { after.mfp += d; }
        prop_assert!(calc_score_topic(&after, &wp) <= calc_score_topic(&tc, &wp));
    }

    #[test]
    fn capped_sum_absorbs_good_counter_increases(
        tc in counters(),
        which in good_counter(),
        d in positive_delta(),
        g in global_counters(),
    ) {
        let mut cfg = eth2();
        let p = pid("p");
        let mut tc = tc;
        // Deliveries keep every topic well above the deficit threshold.
        tc.mesh_time = Rational::from(5000);
        tc.mmd += Rational::from(100);
        let tctrs: TctrsMap = cfg.topics().map(|t| ((p.clone(), t.clone()), tc.clone())).collect();
        let sum: Rational = cfg.iter().map(|(t, wp)| calc_score_topic(&lookup_tctrs(&p, t, &tctrs), wp)).sum();
        let cap = Rational::min_of(&sum, &cfg.global().unwrap().params.topiccap);
        for (_, tp) in cfg.iter_mut() {
            tp.params.topiccap = cap.clone();
        }
        let gctrs: GctrsMap = BTreeMap::from([(p.clone(), g)]);
        let before = calc_score(&p, &tctrs, &gctrs, &cfg).unwrap();
        let mut more = tctrs.clone();
        let key = (p.clone(), agg());
        more.insert(key.clone(), bump(&tctrs[&key], which, &d));
        prop_assert_eq!(calc_score(&p, &more, &gctrs, &cfg).unwrap(), before);
    }

    #[test]
    fn decay_fixes_zero(wp in topic_params()) {
        let (tc, g) = decay_counters(&TopicCounters::default(), &GlobalCounters::default(), &wp.params);
        prop_assert_eq!(tc, TopicCounters::default());
        prop_assert_eq!(g, GlobalCounters::default());
    }
}

// Core types.

proptest! {
    #[test]
    fn lookups_default_on_absence(name in "[a-z]{1,6}", t in 0u64..5) {
        let (p, t) = (pid(&name), gen_topic(t));
        prop_assert_eq!(lookup_score(&p, &ScoreMap::new()), Rational::zero());
        prop_assert_eq!(lookup_tctrs(&p, &t, &TctrsMap::new()), TopicCounters::default());
        prop_assert_eq!(lookup_gctrs(&p, &GctrsMap::new()), GlobalCounters::default());
    }

    #[test]
    fn update_then_lookup(a in "[a-z]{1,4}", b in "[a-z]{1,4}", tc in counters(), g in global_counters(), s in rational(100, 7)) {
        let (pa, pb) = (pid(&a), pid(&b));
        let mut scores = ScoreMap::from([(pb.clone(), Rational::from(-3))]);
        let mut tctrs = TctrsMap::new();
        let mut gctrs = GctrsMap::new();
        scores.insert(pa.clone(), s.clone());
        tctrs.insert((pa.clone(), agg()), tc.clone());
        gctrs.insert(pa.clone(), g.clone());
        prop_assert_eq!(lookup_score(&pa, &scores), s);
        prop_assert_eq!(lookup_tctrs(&pa, &agg(), &tctrs), tc);
        prop_assert_eq!(lookup_gctrs(&pa, &gctrs), g);
        prop_assert_eq!(lookup_tctrs(&pa, &blocks(), &tctrs), TopicCounters::default());
        if a != b {
            prop_assert_eq!(lookup_score(&pb, &scores), Rational::from(-3));
            prop_assert_eq!(lookup_gctrs(&pb, &gctrs), GlobalCounters::default());
        }
    }

    #[test]
    fn subscribers_concatenates_lists(lists in proptest::collection::vec(proptest::collection::vec("[a-d]", 0..4), 0..5)) {
        let subs: BTreeMap<TopicId, Vec<PeerId>> = lists
            .iter()
            .enumerate()
            .map(|(i, ps)| (TopicId::new(format!("T{i}")), ps.iter().map(|s| pid(s)).collect()))
            .collect();
        prop_assert_eq!(subscribers(&subs).len(), lists.iter().map(Vec::len).sum::<usize>());
    }

    #[test]
    fn valid_configs_accepted_and_perturbations_rejected(seeds in proptest::collection::vec(any::<u64>(), 1..4), field in 0usize..8) {
        let base = eth2().global().unwrap().clone();
        let mut cfg = ScoringConfig::default();
        for (i, s) in seeds.iter().enumerate() {
            cfg.insert(gen_topic(i as u64), random_topic_params(&mut ChaCha8Rng::seed_from_u64(*s), &base));
        }
        let cap = cfg.global().unwrap().params.topiccap.clone();
        for (_, tp) in cfg.iter_mut() {
            tp.params.topiccap = cap.clone();
        }
        prop_assert!(validate_config(&cfg).is_empty(), "{:?}", validate_config(&cfg));

        let mut bad = cfg.clone();
        let (_, tp) = bad.iter_mut().next().unwrap();
        match field {
            0 => tp.weights.w1 = Rational::from(-1),
            1 => tp.weights.w3 = Rational::one(),
            2 => tp.weights.w4 = Rational::zero(),
            3 => tp.params.mesh_time_quantum = 0,
            4 => tp.params.mesh_message_deliveries_threshold = &tp.params.mesh_message_deliveries_cap + Rational::one(),
            5 => tp.params.hbm_interval = Rational::zero(),
            6 => tp.params.mesh_message_deliveries_decay = Rational::one(),
            _ => tp.params.dlow = tp.params.d + 1,
        }
        prop_assert!(!validate_config(&bad).is_empty());
    }
}

// Topology.

fn topology(n: usize, edges: &[(usize, usize)], blocks_mask: u32) -> TopologySpec {
    let mut text = String::new();
    for i in 0..n {
        let extra = if blocks_mask >> i & 1 == 1 { " BLOCKS" } else { "" };
        text.push_str(&format!("N n{i} AGG{extra}\n"));
    }
    let set: BTreeSet<(usize, usize)> = edges
        .iter()
        .map(|&(a, b)| (a % n, b % n))
        .filter(|(a, b)| a != b)
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
    for (a, b) in set {
        text.push_str(&format!("E n{a} n{b}\n"));
    }
    parse_topology(&text).unwrap()
}

fn arb_topology(max_nodes: usize) -> impl Strategy<Value = TopologySpec> {
    (
        2..=max_nodes,
        proptest::collection::vec((0usize..64, 0usize..64), 0..40),
        any::<u32>(),
    )
        .prop_map(|(n, edges, mask)| topology(n, &edges, mask))
}

/// All-pairs BFS: (degrees, components, diameter of each component).
fn bfs_oracle(spec: &TopologySpec) -> (Vec<usize>, Vec<(usize, usize)>) {
    let idx: BTreeMap<&PeerId, usize> = spec.nodes.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let n = spec.nodes.len();
    let mut adj = vec![Vec::new(); n];
    for (a, b) in &spec.edges {
        adj[idx[a]].push(idx[b]);
        adj[idx[b]].push(idx[a]);
    }
    let degrees = adj.iter().map(Vec::len).collect();
    let mut comp = vec![usize::MAX; n];
    let mut comps: Vec<(usize, usize)> = Vec::new();
    for s in 0..n {
        let mut dist = vec![usize::MAX; n];
        dist[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
            }
        }
        let reach: Vec<usize> = (0..n).filter(|&v| dist[v] != usize::MAX).collect();
        let ecc = reach.iter().map(|&v| dist[v]).max().unwrap();
        if comp[s] == usize::MAX {
            for &v in &reach {
                comp[v] = comps.len();
            }
            comps.push((reach.len(), ecc));
        } else {
            let c = &mut comps[comp[s]];
            c.1 = c.1.max(ecc);
        }
    }
    (degrees, comps)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn stats_match_bfs_oracle(spec in arb_topology(9)) {
        let s = spec.stats();
        let (deg, comps) = bfs_oracle(&spec);
        prop_assert_eq!(s.nodes, spec.nodes.len());
        prop_assert_eq!(s.min_degree, *deg.iter().min().unwrap());
        prop_assert_eq!(s.max_degree, *deg.iter().max().unwrap());
        prop_assert_eq!(s.avg_degree, Rational::new(deg.iter().sum::<usize>() as i64, deg.len() as i64));
        prop_assert_eq!(s.components, comps.len());
        // Ties for the largest component may pick either one.
        let largest = comps.iter().map(|c| c.0).max().unwrap();
        prop_assert!(comps.iter().any(|&(size, d)| size == largest && d == s.diameter));
    }

    #[test]
    fn built_meshes_are_symmetric_and_capped(spec in arb_topology(12), seed in any::<u64>()) {
        let cfg = eth2();
        let net = build_network(&spec, &cfg, seed).unwrap();
        let adj = spec.adjacency();
        for (p, st) in &net.peers {
            for (t, members) in &st.nts.mesh {
                prop_assert!(members.len() <= cfg.require(t).unwrap().params.d);
                for q in members {
                    prop_assert!(adj[p].contains(q));
                    prop_assert!(net.peers[q].nts.in_mesh(t, p), "{p} has {q} in {t} but not vice versa");
                }
            }
        }
    }
}

// Engine.

const OUTSIDER: &str = "Z";

/// Event scripts over a small network: publishes (some invalid), heartbeats,
/// joins and leaves, and control and data RPCs from nodes or an outsider.
fn script(n: usize, raw: &[(u8, usize, usize, u8)]) -> Vec<Event> {
    let node = |i: usize| pid(&format!("n{}", i % n));
    raw.iter()
        .enumerate()
        .map(|(k, &(kind, a, b, x))| {
            let me = node(a);
            let other = if b % (n + 1) == n || node(b) == me {
                pid(OUTSIDER)
            } else {
                node(b)
            };
            let topic = if x & 1 == 0 { agg() } else { blocks() };
            let m = PayloadId::new(format!("m{}", x % 8));
            let body = |origin: &PeerId| {
                let content = if x % 5 == 0 {
                    format!("INVALID{k}")
                } else {
                    format!("c{k}")
                };
                Payload::new(content, PayloadId::new(format!("p{k}")), topic.clone(), origin.clone())
            };
            match kind % 10 {
                0 | 1 => Event::App {
                    peer: me.clone(),
                    payload: body(&me),
                },
                2 | 3 => Event::heartbeat(&me, Rational::new(7 + i64::from(x % 4), 10)),
                4 => Event::rcv(&me, &other, Msg::Payload(body(&other))),
                5 => match x % 4 {
                    0 | 1 => Event::Join { peer: me, topic },
                    _ => Event::Leave { peer: me, topic },
                },
                6 => Event::rcv(
                    &me,
                    &other,
                    if x & 2 == 0 {
                        Msg::Graft(topic)
                    } else {
                        Msg::Prune(topic)
                    },
                ),
                7 => Event::rcv(
                    &me,
                    &other,
                    if x & 2 == 0 { Msg::Sub(topic) } else { Msg::Unsub(topic) },
                ),
                8 => Event::rcv(&me, &other, Msg::IHave(vec![m])),
                _ => Event::rcv(&me, &other, Msg::IWant(vec![PayloadId::new(format!("p{}", x % 16))])),
            }
        })
        .collect()
}

fn arb_run(max_events: usize) -> impl Strategy<Value = (Network, Vec<Event>)> {
    (
        arb_topology(6),
        proptest::collection::vec((any::<u8>(), 0usize..8, 0usize..8, any::<u8>()), 0..max_events),
        any::<u64>(),
    )
        .prop_map(|(spec, raw, seed)| {
            let net = build_network(&spec, &eth2(), seed).unwrap();
            let evs = script(spec.nodes.len(), &raw);
            (net, evs)
        })
}

fn big_budget(seed: u64) -> RunBudget {
    RunBudget::new(100_000, seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn runs_are_deterministic((net, evs) in arb_run(40), seed in any::<u64>()) {
        let b = big_budget(seed);
        let t1 = run_network(net.clone(), &evs, &b, &eth2()).unwrap();
        let t2 = run_network(net, &evs, &b, &eth2()).unwrap();
        prop_assert_eq!(t1, t2);
    }

    #[test]
    fn traces_respect_budget((net, evs) in arb_run(40), max in 0usize..120) {
        let t = run_network(net, &evs, &RunBudget::new(max, 1), &eth2()).unwrap();
        prop_assert!(t.len() <= max);
    }

    #[test]
    fn counters_stay_nonnegative((net, evs) in arb_run(60)) {
        for (ev, n) in run_network(net, &evs, &big_budget(2), &eth2()).unwrap() {
            for (p, st) in &n.peers {
                for tc in st.tctrs.values() {
                    prop_assert!(tc.is_nonnegative(), "{p} after {ev}: {tc:?}");
                }
                for g in st.gctrs.values() {
                    prop_assert!(!g.apco.is_negative() && !g.ipco.is_negative() && !g.bhvo.is_negative());
                }
            }
        }
    }

    #[test]
    fn payloads_never_go_back((net, evs) in arb_run(60)) {
        let cfg = eth2();
        let b = big_budget(4);
        let trace: Trace = run_network(net.clone(), &evs, &b, &cfg).unwrap();
        let mut before = &net;
        for (ev, after) in &trace {
            if let Event::Msg { from: me, verb: Verb::Rcv, to: sender, msg: Msg::Payload(p) } = ev {
                let st = before.peers[me].clone();
                let out = transition(me, st, ev, &cfg, &b).unwrap();
                for e in &out.emitted {
                    if let Event::Msg { verb: Verb::Snd, to, msg: Msg::Payload(q), .. } = e {
                        if q.pid == p.pid {
                            prop_assert!(to != sender && to != &p.origin, "{ev} led to {e}");
                        }
                    }
                }
            }
            before = after;
        }
    }

    #[test]
    fn trace_prefixes_compose((net, e1) in arb_run(30), raw2 in proptest::collection::vec((any::<u8>(), 0usize..8, 0usize..8, any::<u8>()), 0..30)) {
        let n = net.len();
        let e2 = script(n, &raw2);
        let both: Vec<Event> = e1.iter().chain(&e2).cloned().collect();
        let b = big_budget(5);
        let t1 = run_network(net.clone(), &e1, &b, &eth2()).unwrap();
        let t12 = run_network(net, &both, &b, &eth2()).unwrap();
        prop_assert!(t1.len() < b.max_events);
        prop_assert_eq!(&t12[..t1.len()], &t1[..]);
    }

    #[test]
    fn violations_equal_trace_oracle((net, evs) in arb_run(80), v in 0usize..6, a in 0usize..7, max in 1usize..1000) {
        let cfg = eth2();
        let victim = pid(&format!("n{}", v % net.len()));
        let attacker = if a >= net.len() { pid(OUTSIDER) } else { pid(&format!("n{a}")) };
        let ats = [agg()];
        let b = RunBudget::new(max, 6);
        let bits = run_network_violations(net.clone(), &evs, &b, &cfg, &victim, &attacker, &ats).unwrap();
        let oracle: Vec<bool> = run_network(net, &evs, &b, &cfg)
            .unwrap()
            .iter()
            .filter(|(e, _)| e.is_heartbeat() && e.actor() == &victim)
            .map(|(_, n)| score_prop_violation(&n.peers[&victim], &attacker, &ats, &cfg).unwrap())
            .collect();
        prop_assert_eq!(bits, oracle);
    }
}

// Attacks.

fn gadget(ats: BTreeSet<TopicId>) -> AttackGadget {
    AttackGadget::new(&pid("A"), &pid("V"), ats, [agg(), blocks()])
}

fn attacked_sets() -> impl Strategy<Value = BTreeSet<TopicId>> {
    prop_oneof![
        Just(BTreeSet::new()),
        Just(BTreeSet::from([agg()])),
        Just(BTreeSet::from([blocks()])),
        Just(BTreeSet::from([agg(), blocks()])),
    ]
}

/// V and A adjacent and meshed in both topics, with a few honest nodes
/// hanging off either of them.
fn gadget_net(extra: &[(bool, usize)], seed: u64) -> Network {
    let mut text = String::from("N V AGG BLOCKS\nN A AGG BLOCKS\nE V A\n");
    let mut edges = BTreeSet::new();
    for (i, &(to_v, link)) in extra.iter().enumerate() {
        text.push_str(&format!("N h{i} AGG BLOCKS\n"));
        edges.insert(format!("E {} h{i}\n", if to_v { "V" } else { "A" }));
        if i > 0 {
            edges.insert(format!("E h{} h{i}\n", link % i));
        }
    }
    text.extend(edges);
    build_network(&parse_topology(&text).unwrap(), &eth2(), seed).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn schedules_target_only_the_victim(ats in attacked_sets(), m in 0u64..4, n in 0u64..4, rounds in 0u64..5) {
        let g = gadget(ats.clone());
        let e = Rational::new(7, 10);
        let s = gadget_schedule(&g, m, n, &e, rounds);
        let per_round = m * ats.len() as u64 + n * (2 - ats.len() as u64) + 1;
        prop_assert_eq!(s.events.len() as u64, rounds * per_round);
        for ev in &s.events {
            prop_assert_eq!(ev.actor(), &g.victim);
            prop_assert_eq!(&ev.to_string().parse::<Event>().unwrap(), ev);
            match ev {
                Event::Heartbeat { elapsed, .. } => prop_assert_eq!(elapsed, &e),
                Event::Msg { verb: Verb::Rcv, to, msg: Msg::Payload(p), .. } => {
                    prop_assert_eq!(to, &g.attacker);
                    prop_assert!(g.shared.contains(&p.top));
                }
                other => prop_assert!(false, "unexpected {other}"),
            }
        }
    }

    #[test]
    fn honest_rates_never_violate(extra in proptest::collection::vec((any::<bool>(), 0usize..8), 0..4), seed in any::<u64>(), rounds in 1u64..25) {
        let cfg = eth2();
        let net = gadget_net(&extra, seed);
        let g = gadget(BTreeSet::from([agg()]));
        let out = run_gadget_attack(net, &g, 20, 20, rounds, &cfg, &big_budget(seed)).unwrap();
        prop_assert_eq!(out.violations.len() as u64, rounds);
        prop_assert!(out.violations.iter().all(|b| !b));
    }

    #[test]
    fn attacker_events_touch_only_attacker_counters(
        extra in proptest::collection::vec((any::<bool>(), 0usize..8), 0..4),
        seed in any::<u64>(),
        m in 0u64..3,
        rounds in 1u64..8,
    ) {
        use gossipsub_model::attacks::establish_gadget;
        let cfg = eth2();
        let g = gadget(BTreeSet::from([agg()]));
        let net = establish_gadget(gadget_net(&extra, seed), &g, &cfg).unwrap();
        let e = cfg.global().unwrap().params.hbm_interval.clone();
        let evs = gadget_schedule(&g, m, 5, &e, rounds).events;
        let trace = run_network(net.clone(), &evs, &big_budget(seed), &cfg).unwrap();
        let others = |n: &Network| -> TctrsMap {
            n.peers[&g.victim].tctrs.iter()
                .filter(|((p, t), _)| p != &g.attacker && g.shared.contains(t))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect()
        };
        let mut before = &net;
        for (ev, after) in &trace {
            if ev.actor() == &g.victim && matches!(ev, Event::Msg { verb: Verb::Rcv, to, .. } if to == &g.attacker) {
                prop_assert_eq!(others(before), others(after), "{}", ev);
            }
            before = after;
        }
    }
}

// Property search.

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn counterexamples_replay(seed in any::<u64>(), prop2 in any::<bool>()) {
        let cfg = eth2();
        let property = if prop2 { Property::Prop2 } else { Property::Prop1 };
        for cx in search_counterexamples(property, &cfg, 300, seed).unwrap().iter().take(5) {
            prop_assert!(replay(cx, &cfg).unwrap());
            prop_assert!(replay(&shrink(cx, &cfg).unwrap(), &cfg).unwrap());
        }
    }

    #[test]
    fn held_properties_have_no_counterexamples(seed in any::<u64>(), which in 0usize..3) {
        let property = [Property::Prop3, Property::Prop4, Property::Maxbound][which];
        for cfg in [eth2(), Profile::filecoin().cfg] {
            prop_assert!(search_counterexamples(property, &cfg, 200, seed).unwrap().is_empty());
        }
    }
}

proptest! {
    #[test]
    fn generators_are_total_and_deterministic(n in any::<u64>(), seed in any::<u64>()) {
        prop_assert_eq!(gen_counters(n), gen_counters(n));
        prop_assert!(gen_counters(n).is_nonnegative());
        prop_assert_eq!(gen_topic(n), gen_topic(n));
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (random_counters(&mut rng), random_global(&mut rng))
        };
        prop_assert_eq!(draw(), draw());
    }

    #[test]
    fn generated_inputs_pass_held_checks(n in any::<u64>(), which in good_counter(), d in positive_delta()) {
        for cfg in [eth2(), Profile::filecoin().cfg] {
            for (_, wp) in cfg.iter() {
                let tc = gen_counters(n);
                prop_assert!(check_prop3(&tc, &d, which, wp).is_pass());
                prop_assert!(check_maxbound(&tc, wp).is_pass());
            }
        }
    }
}

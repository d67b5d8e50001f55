//! End-to-end acceptance checks, one line of output per criterion.
//!
//! Run with `cargo test -p gossipsub-model --test acceptance -- --nocapture`
//! to see the report. Every criterion runs even if an earlier one fails.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use gossipsub_model::attacks::{
    build_eclipse, build_partition, canonical_state, induced_liveness_counterexample, multi_schedule, pid_origin_topic,
    run_gadget_attack, run_gadgets, score_prop_violation, AttackGadget, RoundOptions,
};
use gossipsub_model::engine::{run_network, run_network_violations};
use gossipsub_model::event::parse_events;
use gossipsub_model::propcheck::gen::{random_counters, random_global, random_rational, random_topic_params};
use gossipsub_model::propcheck::{
    check_maxbound, check_prop1, check_prop3, check_prop4, replay, search_counterexamples, Case, GoodCounter, Property,
};
use gossipsub_model::scoring::{calc_score, calc_score_topic, max_topic_score};
use gossipsub_model::topology::{build_network, load_topology, parse_topology};
use gossipsub_model::types::{GctrsMap, TctrsMap};
use gossipsub_model::{PeerId, Profile, Rational, RunBudget, ScoringConfig, TopicCounters, TopicId, TopicParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TRIALS: u64 = 10_000;
const SEED: u64 = 0;

const FAST_LIMIT: Duration = Duration::from_secs(10);
const SEARCH_LIMIT: Duration = Duration::from_secs(60);
const FIXED_POINT_LIMIT: Duration = Duration::from_secs(5);
const SCALE_LIMIT: Duration = Duration::from_secs(5 * 60);

const FIXED_POINT_EVENTS: usize = 1_000;
const SCALE_EVENTS: usize = 100_000;
const ATTACK_HEARTBEATS: u64 = 50;
const ORACLE_RUN_EVENTS: usize = 1_000;

const ROPSTEN_NODES: usize = 588;
const ROPSTEN_MIN_DEGREE: usize = 1;
const ROPSTEN_MAX_DEGREE: usize = 418;
const ROPSTEN_AVG_DEGREE: f64 = 25.49;
const ROPSTEN_AVG_TOLERANCE: f64 = 0.01;
const ROPSTEN_DIAMETER: usize = 5;

fn eth2() -> ScoringConfig {
    Profile::eth2().cfg
}

fn pid(s: &str) -> PeerId {
    PeerId::new(s)
}

fn agg() -> TopicId {
    TopicId::new("AGG")
}

fn unbounded() -> RunBudget {
    RunBudget::new(usize::MAX, SEED)
}

fn ropsten() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/ropsten.topo")
}

/// Panics with `msg` unless `ok`.
fn ensure(ok: bool, msg: impl FnOnce() -> String) {
    if !ok {
        panic!("{}", msg());
    }
}

fn within(elapsed: Duration, limit: Duration) {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"));
}

/// Random valid topic params on top of either shipped profile.
fn draw_params(rng: &mut ChaCha8Rng) -> TopicParams {
    let base = if rng.random_bool(0.5) {
        Profile::eth2()
    } else {
        Profile::filecoin()
    };
    random_topic_params(rng, base.cfg.global().unwrap())
}

/// Topic score evaluated directly from the definition, using the big
/// rationals underneath rather than the model's helpers.
fn topic_score_oracle(tc: &TopicCounters, wp: &TopicParams) -> Rational {
    use num_rational::BigRational;
    let r = |x: &Rational| x.inner().clone();
    let u = |x: u64| BigRational::from_integer(x.into());
    let (w, p) = (&wp.weights, &wp.params);
    let mmd = r(&tc.mmd).min(r(&p.mesh_message_deliveries_cap));
    let thr = r(&p.mesh_message_deliveries_threshold);
    let deficit = if r(&tc.mesh_time) > u(p.activation_window) && mmd < thr {
        (&thr - &mmd) * (&thr - &mmd)
    } else {
        u(0)
    };
    Rational::from(
        r(&p.topic_weight)
            * (r(&w.w1) * (r(&tc.mesh_time) / u(p.mesh_time_quantum)).min(u(p.time_quanta_in_mesh_cap))
                + r(&w.w2) * r(&tc.fmd).min(u(p.p2cap))
                + r(&w.w3) * deficit
                + r(&w.w3b) * r(&tc.mfp)
                + r(&w.w4) * r(&tc.imd) * r(&tc.imd)),
    )
}

fn c1_max_topic_score_bound() -> String {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut at_bound = 0;
    for i in 0..TRIALS {
        let tc = random_counters(&mut rng);
        let wp = draw_params(&mut rng);
        let (s, max) = (calc_score_topic(&tc, &wp), max_topic_score(&wp));
        ensure(s <= max, || format!("trial {i}: score {s} above bound {max}"));
        ensure(check_maxbound(&tc, &wp).is_pass(), || {
            format!("trial {i}: maxbound check failed")
        });
        at_bound += usize::from(s == max);
    }
    within(start.elapsed(), FAST_LIMIT);
    format!("{TRIALS} inputs, {at_bound} exactly at the bound")
}

fn c2_prop4_determinism() -> String {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let cfgs = [eth2(), Profile::filecoin().cfg];
    for i in 0..TRIALS {
        let cfg = &cfgs[(i % 2) as usize];
        let mut tcs = BTreeMap::new();
        for t in cfg.topics() {
            if rng.random_bool(0.8) {
                tcs.insert(t.clone(), random_counters(&mut rng));
            }
        }
        let g = random_global(&mut rng);
        let v = check_prop4(&tcs, &tcs.clone(), &g, &g.clone(), cfg).unwrap();
        ensure(v.is_pass(), || format!("trial {i}: {v:?}"));
    }
    within(start.elapsed(), FAST_LIMIT);
    format!("{TRIALS} duplicated inputs scored identically")
}

fn c3_prop3_monotonicity() -> String {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let which = [
        GoodCounter::FirstMessageDeliveries,
        GoodCounter::MeshMessageDeliveries,
        GoodCounter::MeshTime,
    ];
    for i in 0..TRIALS {
        let wp = draw_params(&mut rng);
        let mut tc = random_counters(&mut rng);
        let aw = Rational::from_u64(wp.params.activation_window);
        tc.mesh_time = aw + Rational::one() + random_rational(&mut rng, 400, 2);
        let delta = Rational::one() + random_rational(&mut rng, 40, 4);
        let w = which[(i % 3) as usize];
        let mut after = tc.clone();
        match w {
            GoodCounter::FirstMessageDeliveries => after.fmd += delta.clone(),
            GoodCounter::MeshMessageDeliveries => after.mmd += delta.clone(),
            GoodCounter::MeshTime => after.mesh_time += delta.clone(),
        }
        ensure(calc_score_topic(&after, &wp) >= calc_score_topic(&tc, &wp), || {
            format!("trial {i}: {w:?} +{delta} lowered the score")
        });
        ensure(check_prop3(&tc, &delta, w, &wp).is_pass(), || {
            format!("trial {i}: check failed")
        });
    }
    within(start.elapsed(), FAST_LIMIT);
    format!("{TRIALS} increments, none lowered the score")
}

fn c4_prop1_falsified() -> String {
    let start = Instant::now();
    let cfg = eth2();
    let found = search_counterexamples(Property::Prop1, &cfg, TRIALS, SEED).unwrap();
    ensure(!found.is_empty(), || "no counterexample".into());
    let cx = &found[0];
    ensure(replay(cx, &cfg).unwrap(), || {
        "first counterexample does not replay".into()
    });
    let Case::Prop1 {
        peer,
        topic,
        tctrs,
        gctrs,
    } = &cx.case
    else {
        unreachable!()
    };
    let overall = calc_score(peer, tctrs, gctrs, &cfg).unwrap();
    let topical = calc_score_topic(&tctrs[&(peer.clone(), topic.clone())], cfg.require(topic).unwrap());
    ensure(overall.is_positive() && topical.is_negative(), || {
        format!("replayed scores overall {overall}, {topic} {topical}")
    });

    // The published counterexample bindings must fail as well.
    let p4 = pid("p4");
    let mut reference = TctrsMap::new();
    for (t, fmd, mmd, mt) in [
        ("AGG", 0, 1, 42),
        ("BLOCKS", 324, 330, 377),
        ("SUB1", 371, 377, 324),
        ("SUB2", 318, 324, 371),
    ] {
        let r = Rational::from;
        reference.insert(
            (p4.clone(), TopicId::new(t)),
            TopicCounters::new(r(0), r(mmd), r(mt), r(fmd), r(0)),
        );
    }
    let v = check_prop1(&reference, &GctrsMap::new(), &p4, &agg(), &cfg).unwrap();
    ensure(v.is_fail(), || "reference bindings pass".into());
    within(start.elapsed(), SEARCH_LIMIT);
    format!(
        "{} counterexamples in {TRIALS} trials, first at trial {} (overall {overall}, {topic} {topical})",
        found.len(),
        cx.trial
    )
}

fn c5_prop2_falsified() -> String {
    let start = Instant::now();
    let cfg = eth2();
    let found = search_counterexamples(Property::Prop2, &cfg, TRIALS, SEED).unwrap();
    ensure(!found.is_empty(), || "no counterexample".into());
    ensure(replay(&found[0], &cfg).unwrap(), || {
        "first counterexample does not replay".into()
    });
    within(start.elapsed(), SEARCH_LIMIT);
    format!("{} counterexamples in {TRIALS} trials (topiccap binds)", found.len())
}

const FRINGE: &str = "\
N V AGG BLOCKS
N A AGG BLOCKS
N H1 AGG BLOCKS
N H2 AGG BLOCKS
N H3 AGG BLOCKS
E V A
E A H1
E A H2
E H1 H2
E H2 H3
";

fn c6_blockade_fixed_point() -> String {
    let start = Instant::now();
    let cfg = eth2();
    let net = build_network(&parse_topology(FRINGE).unwrap(), &cfg, SEED).unwrap();
    let g = AttackGadget::new(&pid("A"), &pid("V"), [agg()], [agg(), TopicId::new("BLOCKS")]);
    let budget = RunBudget::new(FIXED_POINT_EVENTS, SEED);
    let rounds = FIXED_POINT_EVENTS as u64;
    let out = run_gadget_attack(net.clone(), &g, 0, 20, rounds, &cfg, &budget).unwrap();
    let hbs = out.violations.len();
    ensure(hbs >= 3, || format!("only {hbs} heartbeats"));
    ensure(out.violations[1..].iter().all(|b| *b), || {
        format!("bits {:?}", out.violations)
    });
    ensure(induced_liveness_counterexample(&out), || {
        format!("no certificate: {out:?}")
    });
    let fp = out.fixed_point_index.unwrap();

    // Recheck the state equality on the raw trace.
    let mut net = net;
    net = gossipsub_model::attacks::establish_gadget(net, &g, &cfg).unwrap();
    let e = cfg.global().unwrap().params.hbm_interval.clone();
    let events = multi_schedule(
        &net,
        std::slice::from_ref(&g),
        0,
        20,
        &e,
        rounds,
        &RoundOptions::default(),
    );
    let trace = run_network(net, &events, &budget, &cfg).unwrap();
    ensure(trace.len() == FIXED_POINT_EVENTS, || {
        format!("{} events processed", trace.len())
    });
    let states: Vec<_> = trace
        .iter()
        .filter(|(ev, _)| ev.is_heartbeat() && ev.actor() == &g.victim)
        .map(|(_, n)| canonical_state(&n.peers[&g.victim]))
        .collect();
    ensure(states.len() == hbs, || "heartbeat count differs between runs".into());
    ensure(states[fp..].windows(2).all(|w| w[0] == w[1]), || {
        "post-heartbeat states differ".into()
    });
    within(start.elapsed(), FIXED_POINT_LIMIT);
    format!(
        "{FIXED_POINT_EVENTS} events, {hbs} heartbeats, first violation at heartbeat {}, fixed point from heartbeat {fp}",
        out.first_violation_index.unwrap()
    )
}

fn c7_scale_run() -> String {
    let start = Instant::now();
    let cfg = eth2();
    let topo = load_topology(&ropsten()).unwrap();
    let net = build_network(&topo, &cfg, SEED).unwrap();
    let adj = topo.adjacency();
    // A fringe victim and a low-degree attacker meshed with it in AGG.
    let (victim, attacker) = net
        .peers
        .iter()
        .rev()
        .find_map(|(v, st)| {
            st.nts
                .mesh_of(&agg())
                .iter()
                .find(|a| adj[*a].len() <= 3 && adj[v].len() <= 3)
                .map(|a| (v.clone(), a.clone()))
        })
        .expect("a fringe pair");
    let shared: BTreeSet<TopicId> = net.peers[&victim]
        .nts
        .subscribed_topics()
        .filter(|t| net.peers[&victim].nts.in_mesh(t, &attacker))
        .cloned()
        .collect();
    let g = AttackGadget::new(&attacker, &victim, [agg()], shared);
    g.validate(&net, &cfg).unwrap();
    let net = gossipsub_model::attacks::establish_gadget(net, &g, &cfg).unwrap();
    let e = cfg.global().unwrap().params.hbm_interval.clone();
    let opts = RoundOptions {
        honest_heartbeats: true,
        publishers: Vec::new(),
    };
    // Enough scripted events that the budget, not the script, ends the run.
    let per_round = multi_schedule(&net, std::slice::from_ref(&g), 0, 20, &e, 1, &opts).len();
    let rounds = (SCALE_EVENTS / per_round + 1) as u64;
    let events = multi_schedule(&net, std::slice::from_ref(&g), 0, 20, &e, rounds, &opts);
    ensure(events.len() >= SCALE_EVENTS, || {
        format!("schedule has only {} events", events.len())
    });
    let budget = RunBudget::new(SCALE_EVENTS, SEED);
    let bits = run_network_violations(net, &events, &budget, &cfg, &victim, &attacker, &[agg()]).unwrap();
    ensure(!bits.is_empty(), || "victim never heartbeat".into());
    let elapsed = start.elapsed();
    within(elapsed, SCALE_LIMIT);
    format!(
        "{SCALE_EVENTS} events on {} nodes in {elapsed:.1?}, victim {victim} attacker {attacker}, {}/{} heartbeats violated",
        topo.nodes.len(),
        bits.iter().filter(|b| **b).count(),
        bits.len()
    )
}

fn c8_eclipse() -> String {
    let start = Instant::now();
    let cfg = eth2();
    // Victim surrounded by four attackers, each fronting an honest ring node.
    let mut text = String::from("N V AGG BLOCKS\n");
    for i in 1..=4 {
        text.push_str(&format!(
            "N A{i} AGG BLOCKS\nN H{i} AGG BLOCKS\nE V A{i}\nE A{i} H{i}\n"
        ));
    }
    text.push_str("E H1 H2\nE H2 H3\nE H3 H4\nE H4 H1\n");
    let net = build_network(&parse_topology(&text).unwrap(), &cfg, SEED).unwrap();
    let attackers: Vec<PeerId> = (1..=4).map(|i| pid(&format!("A{i}"))).collect();
    let gadgets = build_eclipse(&net, &pid("V"), &attackers, &[agg()], &cfg).unwrap();
    ensure(gadgets.len() == 4, || format!("{} gadgets", gadgets.len()));
    let opts = RoundOptions {
        honest_heartbeats: true,
        publishers: (1..=4).map(|i| pid(&format!("H{i}"))).collect(),
    };
    let out = run_gadgets(net, &gadgets, 0, 20, ATTACK_HEARTBEATS, &cfg, &unbounded(), &opts).unwrap();
    let starved = out.received_in(&pid("V"), &agg()).len();
    ensure(starved == 0, || format!("victim received {starved} AGG payloads"));
    let honest = out.received_in(&pid("H3"), &agg()).len();
    ensure(honest > 0, || "honest nodes received nothing either".into());
    let gray = &cfg.global().unwrap().params.gray_list_threshold;
    let mut lowest: Option<Rational> = None;
    for o in &out.outcomes {
        ensure(o.violations.len() as u64 == ATTACK_HEARTBEATS, || {
            format!("{} heartbeats", o.violations.len())
        });
        let low = o.min_attacker_score.clone().unwrap();
        ensure(low.is_positive() && low > *gray, || {
            format!("{} scored {low}", o.gadget.attacker)
        });
        lowest = Some(lowest.map_or(low.clone(), |l| Rational::min_of(&l, &low)));
    }
    let v = &out.final_network.peers[&pid("V")];
    for a in &attackers {
        for t in [agg(), TopicId::new("BLOCKS")] {
            ensure(v.nts.in_mesh(&t, a), || format!("{a} was pruned from V's {t} mesh"));
        }
    }
    within(start.elapsed(), FAST_LIMIT);
    format!(
        "{ATTACK_HEARTBEATS} heartbeats, victim got 0 AGG payloads (H3 got {honest}), lowest attacker score {}",
        lowest.unwrap()
    )
}

/// Components of the undirected graph on `nodes` with `edges`.
fn components_oracle(nodes: &BTreeSet<PeerId>, edges: &BTreeSet<(PeerId, PeerId)>) -> Vec<BTreeSet<PeerId>> {
    let mut left = nodes.clone();
    let mut out = Vec::new();
    while let Some(s) = left.pop_first() {
        let mut comp = BTreeSet::from([s.clone()]);
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for (a, b) in edges {
                let next = if a == &u {
                    b
                } else if b == &u {
                    a
                } else {
                    continue;
                };
                if left.remove(next) {
                    comp.insert(next.clone());
                    q.push_back(next.clone());
                }
            }
        }
        out.push(comp);
    }
    out
}

fn c9_partition() -> String {
    let start = Instant::now();
    let cfg = eth2();
    // Two honest triangles joined only through three attackers, which act
    // against four victims.
    let topo = "\
N L1 AGG
N L2 AGG
N L3 AGG
N R1 AGG
N R2 AGG
N R3 AGG
N X1 AGG
N X2 AGG
N X3 AGG
E L1 L2
E L2 L3
E L3 L1
E R1 R2
E R2 R3
E R3 R1
E X1 L1
E X1 R1
E X2 L2
E X2 R2
E X3 L1
E X3 R2
";
    let net = build_network(&parse_topology(topo).unwrap(), &cfg, SEED).unwrap();
    let pairs = [
        ("X1", "L1"),
        ("X1", "R1"),
        ("X2", "L2"),
        ("X2", "R2"),
        ("X3", "L1"),
        ("X3", "R2"),
    ];
    let cut: Vec<AttackGadget> = pairs
        .iter()
        .map(|(a, v)| AttackGadget::new(&pid(a), &pid(v), [agg()], [agg()]))
        .collect();
    let gadgets = build_partition(&net, &cut, &cfg).unwrap();
    let attackers: BTreeSet<PeerId> = gadgets.iter().map(|g| g.attacker.clone()).collect();
    let victims: BTreeSet<PeerId> = gadgets.iter().map(|g| g.victim.clone()).collect();
    ensure(attackers.len() == 3 && victims.len() == 4, || "cut shape".into());

    let honest: BTreeSet<PeerId> = net.peers.keys().filter(|p| !attackers.contains(*p)).cloned().collect();
    let mesh_edges: BTreeSet<(PeerId, PeerId)> = honest
        .iter()
        .flat_map(|p| {
            net.peers[p]
                .nts
                .mesh_of(&agg())
                .iter()
                .map(move |q| (p.clone(), q.clone()))
        })
        .filter(|(p, q)| honest.contains(q) && p < q)
        .collect();
    let comps = components_oracle(&honest, &mesh_edges);
    ensure(comps.len() >= 2, || format!("{} components", comps.len()));
    let home: BTreeMap<&PeerId, usize> = comps
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |p| (p, i)))
        .collect();

    let opts = RoundOptions {
        honest_heartbeats: true,
        publishers: honest.iter().cloned().collect(),
    };
    let out = run_gadgets(net, &gadgets, 0, 0, ATTACK_HEARTBEATS, &cfg, &unbounded(), &opts).unwrap();
    let (mut inside, mut crossings) = (0usize, 0usize);
    for (pid, receivers) in &out.receipts {
        let (origin, _) = pid_origin_topic(pid).expect("scheduled payload");
        let src = home[&PeerId::new(origin)];
        for r in receivers.iter().filter(|r| honest.contains(*r)) {
            if home[r] == src {
                inside += 1;
            } else {
                crossings += 1;
            }
        }
    }
    ensure(crossings == 0, || format!("{crossings} deliveries crossed the cut"));
    ensure(inside > 0, || "nothing delivered within components".into());
    within(start.elapsed(), FAST_LIMIT);
    format!(
        "{} components, {inside} in-component deliveries, 0 crossings over {ATTACK_HEARTBEATS} heartbeats",
        comps.len()
    )
}

fn c10_oracle_equivalence() -> String {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 10);
    for i in 0..TRIALS {
        let tc = random_counters(&mut rng);
        let wp = draw_params(&mut rng);
        let (got, want) = (calc_score_topic(&tc, &wp), topic_score_oracle(&tc, &wp));
        ensure(got == want, || format!("trial {i}: {got} vs oracle {want}"));
    }

    let cfg = eth2();
    let net = build_network(
        &parse_topology("N A AGG BLOCKS\nN B AGG BLOCKS\nN C AGG\nN D AGG BLOCKS\nE A B\nE B C\nE A C\nE C D\nE B D\n")
            .unwrap(),
        &cfg,
        SEED,
    )
    .unwrap();
    let mut runs = 0;
    for (victim, attacker, seed) in [("B", "A", 1), ("C", "D", 2), ("D", "B", 3)] {
        let mut script = String::new();
        for r in 0..400 {
            script.push_str(&format!(
                "{victim} RCV {attacker} PAYLOAD a{r} BLOCKS {attacker} x{r}\n"
            ));
            script.push_str(&format!("C APP c{r} AGG C y{r}\n"));
            if r % 7 == 3 {
                script.push_str(&format!("A RCV Z PAYLOAD z{r} AGG Z INVALIDz{r}\n"));
            }
            script.push_str("A HBM 7/10\nB HBM 7/10\nC HBM 7/10\nD HBM 7/10\n");
        }
        let evs = parse_events(&script).unwrap();
        let b = RunBudget::new(ORACLE_RUN_EVENTS, seed);
        let (v, a, ats) = (pid(victim), pid(attacker), [agg()]);
        let bits = run_network_violations(net.clone(), &evs, &b, &cfg, &v, &a, &ats).unwrap();
        let trace = run_network(net.clone(), &evs, &b, &cfg).unwrap();
        ensure(trace.len() == ORACLE_RUN_EVENTS, || {
            format!("run {victim}: {} events", trace.len())
        });
        let oracle: Vec<bool> = trace
            .iter()
            .filter(|(e, _)| e.is_heartbeat() && e.actor() == &v)
            .map(|(_, n)| score_prop_violation(&n.peers[&v], &a, &ats, &cfg).unwrap())
            .collect();
        ensure(!bits.is_empty() && bits == oracle, || {
            format!("run {victim}: bits differ from the trace oracle")
        });
        runs += 1;
    }
    within(start.elapsed(), FAST_LIMIT);
    format!("{TRIALS} topic scores equal the oracle; {runs} runs of {ORACLE_RUN_EVENTS} events agree bit for bit")
}

fn c11_ropsten_ingestion() -> String {
    let start = Instant::now();
    let s = load_topology(&ropsten()).unwrap().stats();
    let avg = s.avg_degree_f64();
    ensure(s.nodes == ROPSTEN_NODES, || format!("{} nodes", s.nodes));
    ensure(s.min_degree == ROPSTEN_MIN_DEGREE, || {
        format!("min degree {}", s.min_degree)
    });
    ensure(s.max_degree == ROPSTEN_MAX_DEGREE, || {
        format!("max degree {}", s.max_degree)
    });
    ensure((avg - ROPSTEN_AVG_DEGREE).abs() <= ROPSTEN_AVG_TOLERANCE, || {
        format!("avg degree {avg}")
    });
    ensure(s.diameter == ROPSTEN_DIAMETER, || format!("diameter {}", s.diameter));
    within(start.elapsed(), FAST_LIMIT);
    format!(
        "{} nodes, {} edges, degree {}..{} avg {avg:.4}, diameter {}",
        s.nodes, s.edges, s.min_degree, s.max_degree, s.diameter
    )
}

type Criterion = (&'static str, fn() -> String);

#[test]
fn acceptance() {
    let criteria: [Criterion; 11] = [
        ("max-topic-score bound", c1_max_topic_score_bound),
        ("property 4 determinism", c2_prop4_determinism),
        ("property 3 monotonicity", c3_prop3_monotonicity),
        ("property 1 falsified", c4_prop1_falsified),
        ("property 2 falsified", c5_prop2_falsified),
        ("blockade fixed point", c6_blockade_fixed_point),
        ("scale run", c7_scale_run),
        ("eclipse attack", c8_eclipse),
        ("partition attack", c9_partition),
        ("oracle equivalence", c10_oracle_equivalence),
        ("topology ingestion", c11_ropsten_ingestion),
    ];
    let prev = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(run));
        let t = start.elapsed();
        match res {
            Ok(detail) => println!("criterion {:>2} PASS {name} [{t:.2?}]: {detail}", i + 1),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("criterion {:>2} FAIL {name} [{t:.2?}]: {msg}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    std::panic::set_hook(prev);
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

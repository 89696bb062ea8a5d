#!/usr/bin/env python3
"""Reference simulation for the frozen dispersion trace fixtures.

A straight rule-by-rule transcription of the protocol's round behavior, kept
structurally independent of the simulator crate: robots are plain dicts, the
election sub-round counter is explicit, and only observable registers are
modeled. The simulator's rendered traces must match this script's output
byte for byte for the fixture scenarios.

Usage: trace_oracle.py {triangle|p4}
"""

import sys


def ceil_log2(x):
    return (x - 1).bit_length() if x > 1 else 0


def rev_bit(label, j):
    bits = bin(label)[2:][::-1]
    return j <= len(bits) and bits[j - 1] == "1"


def enc_port(p):
    return "".join("11" if b == "1" else "10" for b in bin(p)[2:])


def compose(kind, arg=None):
    if kind == "NE":
        return "1111"
    if kind == "FE":
        return "1011" + enc_port(arg)
    if kind == "FW":
        return "1110" + enc_port(arg)
    raise ValueError(kind)


def parse(payload):
    if len(payload) < 4:
        return ("MAL",)
    head, rest = payload[:4], payload[4:]
    if head == "1111":
        return ("NE",) if rest == "" else ("MAL",)
    if head not in ("1011", "1110"):
        return ("MAL",)
    if rest == "" or len(rest) % 2 != 0:
        return ("MAL",)
    out = ""
    for i in range(0, len(rest), 2):
        pair = rest[i : i + 2]
        if pair == "11":
            out += "1"
        elif pair == "10":
            out += "0"
        else:
            return ("MAL",)
    return ("FE" if head == "1011" else "FW", int(out, 2))


def fresh_robot(rid):
    return {
        "id": rid,
        "status": "A",
        "phase": "bit",
        "sub": 1,
        "engage": True,
        "candidate": False,
        "mv": 0,
        "j": 1,
        "q": None,
        "qp": None,
        "child": 0,
        "parent": None,
        "forward": False,
        "prt": 0,
        "counting": False,
        "first": True,
        "sender": None,
        "aligned": False,
        "raw": "",
        "since": 2,
        "pending": None,
        "l1i": False,
        "l1d": False,
        "l4i": False,
        "after": None,
        "role": None,
    }


def reset_iteration(rb):
    rb.update(
        phase="bit",
        sub=1,
        engage=True,
        candidate=False,
        mv=0,
        j=1,
        q=None,
        qp=None,
        counting=False,
        aligned=False,
        raw="",
        pending=None,
    )


def take(rb, key):
    val = rb[key]
    if val is None:
        raise RuntimeError(f"register {key} unset for robot {rb['id']}")
    rb[key] = None
    return val


def feed_decoder(rb, inc, cap):
    if not rb["aligned"]:
        if inc:
            rb["aligned"] = True
            rb["raw"] = "1"
        return None
    rb["raw"] += "1" if inc else "0"
    raw = rb["raw"]
    if len(raw) % 2 == 0 and raw.endswith("00"):
        rb["aligned"] = False
        rb["raw"] = ""
        return parse(raw[:-2])
    if len(raw) > cap:
        rb["aligned"] = False
        rb["raw"] = ""
        return ("MAL",)
    return None


def arm(rb, kind, arg, target, after, role=None):
    rb["sender"] = {"bits": compose(kind, arg), "to": target, "ret": False}
    rb["phase"] = "send"
    rb["after"] = after
    rb["role"] = role


def finish_send(rb):
    rb["sender"] = None
    if rb["after"] == "idle":
        rb["status"] = "I"
        rb["phase"] = "done"
    else:
        rb["phase"] = "await"
    rb["after"] = None


def election(rb, obs):
    sub = rb["sub"]
    act = "S"
    if sub == 1:
        if rb["engage"]:
            if obs["alone"]:
                rb["candidate"] = True
            elif rev_bit(rb["id"], rb["j"]):
                rb["mv"] = 1
                rb["pending"] = "q"
                act = ("M", 0)
        rb["sub"] = 2
    elif sub == 2:
        if rb["engage"] and rb["mv"] == 0 and rb["l1d"]:
            rb["mv"] = 2
            rb["pending"] = "q"
            act = ("M", 0)
        rb["sub"] = 3
    elif sub == 3:
        if rb["engage"] and rb["mv"] == 2:
            rb["mv"] = 0
            act = ("M", take(rb, "q"))
        elif rb["engage"] and rb["mv"] == 1:
            back = take(rb, "q")
            if not rb["l1i"]:
                rb["mv"] = 0
            act = ("M", back)
        rb["sub"] = 4
    elif sub == 4:
        if rb["engage"] and rb["mv"] == 1:
            rb["engage"] = False
            rb["pending"] = "qp"
            act = ("M", obs["deg"] - 1)
        rb["sub"] = 5
    elif sub == 5:
        if rb["engage"] and rb["candidate"]:
            rb["pending"] = "qp"
            act = ("M", obs["deg"] - 1)
        rb["sub"] = 6
    else:
        if rb["engage"] and rb["candidate"]:
            home = take(rb, "qp")
            if rb["first"]:
                rb["status"] = "M"
                rb["child"] = -1
                rb["prt"] = 0
                rb["phase"] = "probe"
            else:
                rb["status"] = "F"
                rb["forward"] = False
                rb["phase"] = "fstart"
            rb["first"] = False
            rb["j"] = 1
            rb["sub"] = 1
            act = ("M", home)
        elif not rb["engage"]:
            if rb["l1i"]:
                home = take(rb, "qp")
                rb["engage"] = True
                rb["mv"] = 0
                rb["first"] = False
                rb["j"] = 1
                rb["sub"] = 1
                rb["phase"] = "observe"
                act = ("M", home)
            else:
                rb["sub"] = 1
        else:
            rb["j"] += 1
            rb["sub"] = 1
    return act


def dispatch(rb, obs, cls, ec, cap):
    while True:
        ph = rb["phase"]
        if ph == "bit":
            if cls != 1:
                return "S"
            return election(rb, obs)
        if ph == "observe":
            msg = feed_decoder(rb, obs["inc"], cap) if ec == 4 else None
            if msg is not None and msg[0] == "NE":
                rb["counting"] = True
            if rb["counting"] and ec == 3 and obs["dec"]:
                rb["child"] += 1
            if ec == 5 and obs["dec"] and not rb["l4i"]:
                reset_iteration(rb)
            return "S"
        if ph == "fstart":
            if obs["alone"]:
                rb["phase"] = "wave_wait"
                continue
            rb["phase"] = "relay_back"
            return ("M", rb["child"])
        if ph == "wave_wait":
            if cls == 0:
                rb["phase"] = "wave_back"
                return ("M", rb["child"])
            return "S"
        if ph == "wave_back":
            rb["status"] = "I"
            rb["phase"] = "done"
            return ("M", obs["via"])
        if ph == "relay_wait":
            if cls == 2:
                rb["phase"] = "relay_back"
                return ("M", rb["child"])
            return "S"
        if ph == "relay_back":
            rb["aligned"] = False
            rb["raw"] = ""
            rb["phase"] = "receive"
            return ("M", obs["via"])
        if ph == "receive":
            msg = feed_decoder(rb, obs["inc"], cap) if ec == 4 else None
            if msg is None:
                return "S"
            if msg[0] == "NE":
                rb["status"] = "M"
                rb["prt"] = rb["child"] + 1
                rb["phase"] = "probe"
                return "S"
            if msg[0] == "MAL":
                raise RuntimeError("malformed signal at a waiting link")
            rb["qp"] = msg[1]
            if rb["parent"] is not None:
                arm(rb, "FW", rb["child"], rb["parent"], "depart", "F")
                return "S"
            rb["phase"] = "await"
            rb["role"] = "F"
            continue
        if ph == "probe":
            if cls != 3:
                return "S"
            if rb["prt"] >= obs["deg"]:
                if rb["parent"] is None:
                    raise RuntimeError("probe cursor exhausted with no parent")
                arm(rb, "NE", None, rb["parent"], "idle")
                return "S"
            rb["phase"] = "probe_back"
            return ("M", rb["prt"])
        if ph == "probe_back":
            back = obs["via"]
            if obs["alone"]:
                if rb["parent"] is not None:
                    arm(rb, "FE", rb["prt"], rb["parent"], "depart", "M")
                else:
                    rb["phase"] = "await"
                    rb["role"] = "M"
            else:
                rb["prt"] += 1
                rb["phase"] = "probe"
            return ("M", back)
        if ph == "send":
            snd = rb["sender"]
            if snd["ret"]:
                snd["ret"] = False
                back = obs["via"]
                if snd["bits"] == "":
                    finish_send(rb)
                return ("M", back)
            if cls == 4 and snd["bits"]:
                bit, snd["bits"] = snd["bits"][0], snd["bits"][1:]
                if bit == "1":
                    snd["ret"] = True
                    return ("M", snd["to"])
                if snd["bits"] == "":
                    finish_send(rb)
            return "S"
        if ph == "await":
            if cls == 5 and rb["since"] >= 2:
                port = rb["prt"] if rb["role"] == "M" else rb["child"]
                rb["phase"] = "arrive"
                return ("M", port)
            return "S"
        if ph == "arrive":
            rb["parent"] = obs["via"]
            if rb["role"] == "M":
                rb["child"] = 0
                rb["phase"] = "mwait"
            else:
                rb["child"] = take(rb, "qp")
                rb["forward"] = True
                rb["phase"] = "fwait"
            return "S"
        if ph == "mwait":
            if obs["inc"] and ec == 0:
                rb["status"] = "I"
                rb["phase"] = "done"
                return "S"
            if obs["inc"] and ec == 2:
                rb["prt"] = 0
                rb["phase"] = "probe"
                continue
            return "S"
        if ph == "fwait":
            if obs["inc"] and ec == 0:
                rb["phase"] = "wave_wait"
            elif obs["inc"] and ec == 2:
                rb["phase"] = "relay_wait"
            return "S"
        if ph == "done":
            return "S"
        raise RuntimeError(f"unknown phase {ph}")


def step(rb, obs, cap):
    if rb["status"] == "I":
        return "S"
    rnd = obs["round"]
    cls = rnd % 6
    ec = (rnd - 1) % 6
    if obs["via"] is not None:
        if rb["pending"] == "q":
            rb["q"] = obs["via"]
        elif rb["pending"] == "qp":
            rb["qp"] = obs["via"]
        rb["pending"] = None
    if ec == 1:
        rb["l1i"], rb["l1d"] = obs["inc"], obs["dec"]
    if ec == 4:
        rb["l4i"] = obs["inc"]
    if rnd == 1 and obs["alone"] and rb["first"] and rb["phase"] == "bit" and rb["sub"] == 1:
        rb["status"] = "I"
        rb["phase"] = "done"
        return "S"
    act = dispatch(rb, obs, cls, ec, cap)
    rb["since"] = 0 if act != "S" else min(rb["since"] + 1, 2)
    return act


def simulate(ports, source, ids):
    n = len(ports)
    deg = [len(p) for p in ports]
    delta = max(deg)
    m = sum(deg) // 2
    k = len(ids)
    eff = source
    if deg[source] == 1 and deg[ports[source][0][0]] >= 2:
        eff = ports[source][0][0]
    cap = 4 + 2 * ceil_log2(delta + 1) + 2
    big_l = max(max(ids), k - 1)

    robots = {rid: fresh_robot(rid) for rid in ids}
    pos = {rid: eff for rid in ids}
    moved_last = {rid: False for rid in ids}
    obs = {
        rid: {
            "round": 1,
            "alone": k == 1,
            "inc": False,
            "dec": False,
            "deg": deg[eff],
            "via": None,
        }
        for rid in ids
    }

    lines = []
    class_moves = [0] * 6
    last4_src = False
    n_bound = 0
    rounds = 0
    outcome = "Timeout"

    for rnd in range(1, 100001):
        entered = {}
        left = {}
        entries = []
        any_fresh = False
        moves = {}
        for rid in sorted(ids):
            rb = robots[rid]
            act = step(rb, obs[rid], cap)
            start = pos[rid]
            if act == "S":
                moves[rid] = None
                entries.append(f"{rid}@{start}:S:{rb['status']}")
            else:
                port = act[1]
                if port >= deg[start]:
                    raise RuntimeError(f"robot {rid} used port {port} at node {start}")
                moves[rid] = ports[start][port]
                left[start] = left.get(start, 0) + 1
                entered[moves[rid][0]] = entered.get(moves[rid][0], 0) + 1
                if not moved_last[rid]:
                    any_fresh = True
                entries.append(f"{rid}@{start}:M{port}:{rb['status']}")
        if any_fresh:
            class_moves[rnd % 6] += 1

        via = {}
        for rid in ids:
            if moves[rid] is not None:
                pos[rid] = moves[rid][0]
                via[rid] = moves[rid][1]
                moved_last[rid] = True
            else:
                via[rid] = None
                moved_last[rid] = False

        tallies = " ".join(
            f"{v}:+{entered.get(v, 0)}/-{left.get(v, 0)}"
            for v in sorted(set(entered) | set(left))
        )
        line = f"R {rnd} {rnd % 6} | " + " ".join(entries) + " |"
        if tallies:
            line += " " + tallies
        lines.append(line)

        if rnd % 6 == 5 and left.get(eff, 0) > entered.get(eff, 0) and not last4_src:
            n_bound += 1
            lines.append(f"E {rnd} boundary {n_bound}")
        if rnd % 6 == 4:
            last4_src = entered.get(eff, 0) > left.get(eff, 0)

        if all(robots[r]["status"] == "I" for r in ids):
            n_bound += 1
            lines.append(f"E {rnd} boundary {n_bound}")
            outcome = "Dispersed"
            rounds = rnd
            break

        occ = {}
        for rid in ids:
            occ[pos[rid]] = occ.get(pos[rid], 0) + 1
        for rid in ids:
            v = pos[rid]
            if via[rid] is not None:
                inc = dec = False
            else:
                inc = entered.get(v, 0) > left.get(v, 0)
                dec = left.get(v, 0) > entered.get(v, 0)
            obs[rid] = {
                "round": rnd + 1,
                "alone": occ[v] == 1,
                "inc": inc,
                "dec": dec,
                "deg": deg[v],
                "via": via[rid],
            }

    out = [
        "# disperse-trace v1",
        f"# graph n={n} m={m} delta={delta}",
        f"# source {source} effective {eff}",
        f"# k {k} L {big_l}",
        "# ids " + " ".join(str(i) for i in ids),
    ]
    out.extend(lines)
    out.append(f"# outcome {outcome}")
    out.append(f"# rounds {rounds}")
    out.append("# class_moves " + " ".join(str(c) for c in class_moves))
    out.append("# final " + " ".join(f"{v}:{r}" for v, r in sorted((pos[r], r) for r in ids)))
    return "\n".join(out) + "\n"


# Triangle with explicit ports: edges (0p0,1p0), (0p1,2p0), (1p1,2p1).
TRIANGLE = [[(1, 0), (2, 0)], [(0, 0), (2, 1)], [(0, 1), (1, 1)]]

# Path 0-1-2-3; robots start on the degree-1 end.
P4 = [[(1, 0)], [(0, 0), (2, 0)], [(1, 1), (3, 0)], [(2, 1)]]

SCENARIOS = {
    "triangle": (TRIANGLE, 0, [1, 2, 3]),
    "p4": (P4, 0, [1, 2, 3, 4]),
}


def main():
    if len(sys.argv) != 2 or sys.argv[1] not in SCENARIOS:
        sys.stderr.write("usage: trace_oracle.py {triangle|p4}\n")
        return 2
    ports, source, ids = SCENARIOS[sys.argv[1]]
    sys.stdout.write(simulate(ports, source, ids))
    return 0


if __name__ == "__main__":
    sys.exit(main())

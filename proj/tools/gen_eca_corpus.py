#!/usr/bin/env python3
"""Writes the round-trip corpus under fixtures/rules/corpus (deterministic)."""
import pathlib
import random
import sys

SUBJECTS = ["Temperature_bedroom", "humidity_bedroom", "Door_Bedroom", "Bed_Mattress", "Lamp_2",
            "Smoke_kitchen", "User_A", "Shower", "Window_livingroom", "TV_1"]
PREDICATES = ["CurrentValue", "Angle", "ActivatedCells", "Entity_state", "level", "triggered", "open"]
EVENTS = ["Bed_pressure_Sensor.triggered", "User_A_isGettingUP", "Smoke_kitchen.level", "Door_Bedroom.Angle",
          "TV_1.switched", "Clock.tick", "Shower.Entity_state", "User_A.acknowledged", "Alarm_Timeout"]
PROVIDERS = ["Air_Conditioner_Controller", "Lamp_Controller", "Schedule_Reminder", "Alarm_Siren",
             "Blind_Controller", "PDA_Notifier", "Weather_Forecast_Displayer"]
SERVICES = [("Air_Conditioner", ["Start", "Stop"]), ("Light", ["On", "Off", "Dim"]), ("Remind", ["Query", "Display"]),
            ("Alarm", ["Ring", "Stop"]), ("Blind", ["Open", "Close"]), ("PDA", ["Notify", "Display"])]
TARGETS = ["PDA", "Air_Conditioner", "Sensor_Provider", "Light", "Alarm", "Blind", "Lamp*", "User_*"]
OPS = ["<", "<=", ">", ">=", "==", "!="]


def kw(rng, word):
    return rng.choice([word, word.lower(), word.upper(), word.capitalize()])


def literal(rng):
    kind = rng.randrange(5)
    if kind == 0:
        return str(rng.randint(-40, 200))
    if kind == 1:
        return f"{rng.randint(0, 99)}.{rng.randint(1, 9)}"
    if kind == 2:
        return f"{rng.randint(0, 23)}:{rng.randint(0, 59):02d}"
    if kind == 3:
        return rng.choice(['"On"', '"Off"', '"fire \\"kitchen\\""', '"a, b; c"'])
    return rng.choice(["true", "false"])


def variable(rng):
    return f"{rng.choice(SUBJECTS)}.{rng.choice(PREDICATES)}"


def expr(rng, depth=0):
    roll = rng.random()
    if depth < 2 and roll < 0.25:
        return f"{expr(rng, depth + 1)} && {expr(rng, depth + 1)}"
    if depth < 2 and roll < 0.45:
        return f"{expr(rng, depth + 1)}||{expr(rng, depth + 1)}"
    if depth < 2 and roll < 0.55:
        return f"!({expr(rng, depth + 1)})"
    if depth < 2 and roll < 0.65:
        return f"( {expr(rng, depth + 1)} )"
    return f"{variable(rng)} {rng.choice(OPS)} {literal(rng)}"


def action(rng, last):
    svc, methods = rng.choice(SERVICES)
    args = ", ".join(literal(rng) for _ in range(rng.randrange(3)))
    semi = ";" if (not last or rng.random() < 0.7) else ""
    return f"<{rng.choice(PROVIDERS)}>.{svc}:{rng.choice(methods)}({args}){semi}"


def rule(rng, indent):
    pad = " " * indent
    event = rng.choice(EVENTS) + ("()" if rng.random() < 0.6 else "")
    cond = f"{kw(rng, 'If')} {expr(rng)} " if rng.random() < 0.7 else ""
    n = rng.randint(1, 3)
    acts = [action(rng, i == n - 1) for i in range(n)]
    then = f"{kw(rng, 'Then')} {kw(rng, 'DO')}"
    if rng.random() < 0.4:
        body = "\n".join(pad + "    " + a for a in acts)
        return f"{pad}{kw(rng, 'When')} {event} {{{cond}{then}\n{body}\n{pad}}}"
    return f"{pad}{kw(rng, 'When')} {event} {cond}{then} " + " ".join(acts)


def rule_set(rng, indent):
    pad = " " * indent
    head = kw(rng, "rules")
    if rng.random() < 0.8:
        names = rng.sample(TARGETS, rng.randint(1, 3))
        head += f" {kw(rng, 'for')} " + ", ".join(f"<{t}>" if rng.random() < 0.7 else t for t in names)
    mode = rng.randrange(4)
    if mode == 1:
        head += " " + kw(rng, "choice")
    elif mode == 2:
        head += f" {kw(rng, 'loop')} {kw(rng, 'until')} {rng.choice(EVENTS)}" + ("()" if rng.random() < 0.5 else "")
    elif mode == 3:
        head += " " + kw(rng, "sequence")
    rules = "\n".join(rule(rng, indent + 4) for _ in range(rng.randint(1, 4)))
    comment = f" // set {rng.randint(1, 99)}" if rng.random() < 0.4 else ""
    return f"{pad}{head} {{\n{rules}\n{pad}}}{comment}"


def rule_file(rng):
    wrapped = rng.random() < 0.4
    indent = 4 if wrapped else 0
    sets = "\n".join(rule_set(rng, indent) for _ in range(rng.randint(1, 4)))
    header = f"// generated rule file, seed {rng.randint(0, 10**6)}\n" if rng.random() < 0.5 else ""
    if wrapped:
        return f"{header}{kw(rng, 'Begin')} {{\n{sets}\n}} {kw(rng, 'End')}\n"
    return f"{header}{sets}\n"


def main():
    root = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "rules" / "corpus"
    root.mkdir(parents=True, exist_ok=True)
    count = int(sys.argv[1]) if len(sys.argv) > 1 else 24
    rng = random.Random(20240611)
    for i in range(count):
        (root / f"gen_{i:02d}.eca").write_text(rule_file(rng))


if __name__ == "__main__":
    main()

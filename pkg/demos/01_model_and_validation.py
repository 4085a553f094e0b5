"""Build models, check the standing hypotheses, round-trip the JSON schema.

The model of an n-species competitive community driven by Brownian noise and
discrete jump marks is parameterised entirely by bounded coefficient
functions (constants, sinusoids, piecewise constants).  Because extrema of
these forms are available in closed form, validity is decided exactly: growth
rates must stay positive, self-interaction must stay bounded away from zero,
cross-interaction must stay non-negative, and every relative jump size must
stay strictly above -1 (a jump of -1 would annihilate the population).
"""

import json

from lvjumps import (
    Const,
    MarkSpace,
    ModelSpec,
    PiecewiseConst,
    Sinusoid,
    constant_model,
    validate_model,
)
from lvjumps.model import model_from_payload, model_to_payload

print("== a valid constant-coefficient model ==")
benchmark = constant_model(1, a=1.0, b=1.0, sigma=0.5, gamma=-0.5, weights=(1.0,))
print("benchmark:", validate_model(benchmark))

print()
print("== seasonal growth with a mid-study treatment change ==")
seasonal = ModelSpec(
    n=2,
    a=(Sinusoid(1.2, 0.4, omega=2.1, phase=0.0), Const(0.9)),
    B=(
        (Const(1.0), Const(0.3)),
        (PiecewiseConst((5.0,), (0.4, 0.1)), Const(0.8)),
    ),
    sigma=(Const(0.4), Sinusoid(0.3, 0.2, omega=1.0, phase=1.0)),
    gamma=((Const(-0.3), Const(0.5)), (Const(0.2), Const(-0.6))),
    marks=MarkSpace((0.7, 0.4)),
)
print("seasonal:", validate_model(seasonal))

print()
print("== a broken model is reported, not rejected silently ==")
broken = ModelSpec(
    n=1,
    a=(Const(1.0),),
    B=((Sinusoid(0.5, 0.5, omega=1.0, phase=0.0),),),  # inf b_11 = 0
    sigma=(Const(0.5),),
    gamma=((Const(-1.0),),),  # reaches -1
    marks=MarkSpace((1.0,)),
)
for violation in validate_model(broken).violations:
    print(" -", violation)

print()
print("== canonical JSON form (strict: unknown fields are rejected) ==")
payload = model_to_payload(benchmark)
print(json.dumps(payload, indent=2))
assert model_to_payload(model_from_payload(payload)) == payload
print("round trip ok")

"""Sign and orientation conventions in force, attached to every CLI report."""


def ledger(lambda_slope: str = "cot") -> dict:
    return {
        "meridian": "phi = 0 at the apex; tangent (cos phi, -sin phi); outer normal (sin phi, cos phi)",
        "profile_ode": "d(rho)/ds = cos(phi), dz/ds = -sin(phi)",
        "contact_angle": "cos(theta) = nu_M . nu_K; on a flat substrate theta = pi - phi_end",
        "regimes": "hydrophobic theta < pi/2, hydrophilic theta > pi/2",
        "lambda_slope": lambda_slope,
        "lambda_height": "|cot(theta)| (a - rho)" if lambda_slope == "cot" else "|tan(theta)| (a - rho)",
        "gamma": "gamma = -(n/(n+1)) H(Sigma) / int tan(theta); caps: -r cos(theta)/(n+1)",
        "calibrated_volume": "V = |Omega| + gamma H(Sigma)",
        "wedge_prism": "side length l",
        "gravity": "g(x) = B z with B >= 0 (sessile)",
    }

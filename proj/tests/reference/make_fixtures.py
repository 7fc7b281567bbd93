"""Writes the fixture advisory database and release-history snapshot."""

import datetime
import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "fixtures"

hist = {}
def add(name, versions):
    base = datetime.datetime(2012,1,1)
    hist[name] = [{"version": v, "upload_time": (base + datetime.timedelta(days=17*i)).strftime("%Y-%m-%dT%H:%M:%S")} for i, v in enumerate(versions)]
add("alpha-web", [f"{i//10}.{i%10}.0" for i in range(1,41)])
add("beta-orm", [f"1.{i}" for i in range(0,32)])
add("gamma-auth", [f"0.{i}" for i in range(1,31)])
add("delta-cache", [f"3.0.{i}" for i in range(0,12)])
add("epsilon-img", [f"5.{i}.0" for i in range(0,28)])
add("zeta-http", [f"{i}.0" for i in range(1,31)])
add("theta-rpc", [f"0.0.{i}" for i in range(1,21)])
iota=[]
i=1
while len(iota)<27:
    if i%4==0: iota.append(f"0.{i}rc1")
    iota.append(f"0.{i}")
    i+=1
add("iota-sql", iota[:27])
add("kappa-tpl", ["1.0.0","1.0.1","1.1","2.0rc1","2.0","2.0.1","2.1","2.2","3.0a1","3.0b2","3.0","3.1","3.2","3.3","4.0"])
hist["kappa-tpl"][1]["upload_time"] = "2011-06-01T00:00:00"
snap = {"schema_version": 1, "packages": hist}
def adv(i, specs, cve=None, text="Fixture advisory."):
    return {"advisory": text, "cve": cve, "id": f"pyup.io-{90000+i}", "specs": specs, "v": ",".join(specs)}
db = {
 "$meta": {"advisory": "Fixture database for tests.", "timestamp": 1530000000},
 "alpha-web": [adv(1, [">=0.5.0,<1.3.0", "==1.5.0"], "CVE-2015-0221"), adv(2, [">=1.8.0,<2.1.0", ">=2.3.0,<3.0.0"]), adv(3, [">=2.8.0,<3.9.0"], "CVE-2017-12345")],
 "Beta_ORM": [adv(4, ["<1.4", ">=1.9,<1.13"]), adv(5, ["==1.16", ">=1.20,<1.25", ">=1.28,<1.30"], "CVE-2016-1000"), adv(6, [">=1.10,<1.12"])],
 "gamma-auth": [adv(7, ["<0.13", ">=0.99,<1.0"])],
 "delta-cache": [adv(8, ["<3.0.6", ">=3.0.9"])],
 "epsilon-img": [adv(9, [">=5.0.0"]), adv(10, ["!=5.3.0"])],
 "zeta-http": [adv(11, ["==4.0", ">=25.0,<27.0"]), adv(12, [">=28.0,<30.0"])],
 "eta-xml": [adv(13, ["<1.0"]), adv(14, ["<2.0"])],
 "theta-rpc": [adv(15, ["<9.9"]), adv(16, [">=7.0,<8.0"])],
 "iota-sql": [adv(17, ["<0.3", ">=0.8rc1,<0.10"]), adv(18, [">=0.12,<0.15", ">=0.19,<0.20"]), {"advisory": "entry without specs", "cve": None, "id": "pyup.io-90019", "v": "<0.1"}],
 "kappa-tpl": [adv(20, ["<=1.0", ">=2.0rc1,<2.0.1", ">=3.0a1,<3.0"])],
}
json.dump(db, open(OUT / "fixture_db.json","w"), indent=2)
open(OUT / "fixture_db.json","a").write("\n")
json.dump(snap, open(OUT / "fixture_snapshot.json","w"), indent=2)
open(OUT / "fixture_snapshot.json","a").write("\n")

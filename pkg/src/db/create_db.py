import sys

from src.db.database import create_registry_engine, init_db
from src.db.entities import *

if __name__ == "__main__":
    init_db(create_registry_engine(sys.argv[1] if len(sys.argv) > 1 else "data/run"))

# Reporting package

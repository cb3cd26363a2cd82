# Encoders package
